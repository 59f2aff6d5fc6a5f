#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "perfhom/geometry.hpp"

namespace perfhom {

enum class BoundaryTag { outer, hole };

// Oriented so the mesh interior lies on the left of a -> b; the outward
// normal of the material is then (dy, -dx)/len.
struct BoundaryEdge {
  int a = 0, b = 0;
  BoundaryTag tag = BoundaryTag::outer;
};

struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW
  std::vector<BoundaryEdge> boundary_edges;

  // Set by the structured rectangle generator; enables O(1) point location
  // for interpolation between meshes.
  bool structured = false;
  Rect grid_box;
  int grid_nx = 0, grid_ny = 0;

  double triangle_area(int t) const;
  double total_area() const;
  double max_edge_length() const;
  double min_angle_deg() const;
  double boundary_length(BoundaryTag tag) const;
  int count_boundary_loops() const;
};

// Mesh of Y* whose opposite faces carry mirrored vertices. pairing maps each
// slave vertex on a far face (x=1 or y=1) to its translate on the near face;
// the four corners chain to a single class.
struct PeriodicMesh {
  TriMesh base;
  std::vector<std::pair<int, int>> pairing;  // (slave, master)
};

inline constexpr int kConstrainedDof = -1;

struct DofMap {
  std::vector<int> vertex_to_dof;  // kConstrainedDof for eliminated vertices
  int n_dofs = 0;
};

/// Periodic-capable mesh of the perforated unit cell Y*. Grid resolution is
/// ceil(1/h_target) rounded up to even, which keeps the union-jack pattern
/// mirror symmetric.
PeriodicMesh triangulate_cell(const UnitCell& cell, double h_target);

/// Conforming mesh of Omega_eps: one hole-fitted cell template tiled over
/// every eps-cell, merged exactly on shared faces.
TriMesh triangulate_perforated(const PerforatedDomain& domain, double h_target);

/// Structured union-jack mesh of a rectangle (no holes).
TriMesh triangulate_rect(const Rect& rect, double h_target);

/// Dirichlet elimination and periodic identification. HOLE-tagged vertices
/// are always free.
DofMap build_dofmap(const TriMesh& mesh, std::optional<BoundaryTag> dirichlet_tag,
                    const std::vector<std::pair<int, int>>* pairing = nullptr);

// Plain-text dump: "v x y", "t i j k", "b i j TAG". Round-trips bit-exactly.
void write_mesh(std::ostream& os, const TriMesh& mesh);
TriMesh read_mesh(std::istream& is);

/// P1 evaluation of per-vertex values at a point of a structured mesh.
double eval_p1(const TriMesh& donor, const std::vector<double>& vertex_values, Vec2 p);

/// Expands dof values to per-vertex values (constrained -> 0, slaves -> master).
std::vector<double> dof_to_vertex_values(const TriMesh& mesh, const DofMap& dofs,
                                         const std::vector<double>& u);

}  // namespace perfhom
