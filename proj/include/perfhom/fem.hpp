#pragma once

#include <functional>
#include <span>
#include <vector>

#include "perfhom/mesh.hpp"

namespace perfhom {

using FieldVector = std::vector<double>;

// Compressed-row symmetric sparse matrix. Assemblers insert (i,j) and (j,i)
// together, so symmetry is exact by construction.
struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> vals;

  void mul(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  double quadratic_form(std::span<const double> x) const;  // x^T A x
  bool exactly_symmetric() const;
};

class CsrBuilder {
 public:
  explicit CsrBuilder(int n) : n_(n) {}
  void add(int i, int j, double v) { triplets_.push_back({i, j, v}); }
  void add_symmetric(int i, int j, double v) {
    add(i, j, v);
    if (i != j) add(j, i, v);
  }
  SparseMatrix build() const;

 private:
  struct Triplet {
    int i, j;
    double v;
  };
  int n_;
  std::vector<Triplet> triplets_;
};

/// sum_k coef[k] * mat[k], pattern = sorted union.
SparseMatrix csr_lincomb(const std::vector<std::pair<double, const SparseMatrix*>>& terms);

struct Mat2 {
  double a11 = 1, a12 = 0, a21 = 0, a22 = 1;
};

// Reaction pair (f, g) with growth exponents and the structure constants of
// the one-sided bounds, plus antiderivatives for the validation check.
struct Nonlinearity {
  std::function<double(double)> f;
  std::function<double(double)> g;
  double p = 2.0;
  double q = 2.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta = 1.0;
  double ell = 1.0;
  std::function<double(double)> F_antideriv;
  std::function<double(double)> G_antideriv;
};

enum class FKind { linear, power };
enum class GKind { linear, linear_tanh };

/// Catalog entries known to satisfy the one-sided bounds; g is restricted to
/// q = 2 variants that also satisfy the upper Lipschitz-type bound required
/// by the limit equation.
Nonlinearity make_nonlinearity(FKind f_kind, double p, GKind g_kind);

/// Samples s, r on [-span, span] with the given step and checks the growth
/// and one-sided bounds plus the antiderivative consistency. Throws
/// ConfigError on violation.
void validate_nonlinearity(const Nonlinearity& nl, double span = 10.0, double step = 0.01);

enum class Region { domain, hole_boundary };

SparseMatrix assemble_stiffness(const TriMesh& mesh, const DofMap& dofs);
SparseMatrix assemble_stiffness_q(const TriMesh& mesh, const DofMap& dofs, const Mat2& q);
SparseMatrix assemble_mass(const TriMesh& mesh, const DofMap& dofs);
SparseMatrix assemble_boundary_mass(const TriMesh& mesh, const DofMap& dofs, BoundaryTag tag,
                                    double weight);

/// Lumped measure of each basis function over the region (triangle areas /3,
/// or tagged edge lengths /2).
FieldVector lumped_measure(const TriMesh& mesh, const DofMap& dofs, Region region);

/// Vertex-lumped evaluation: out_i = weight * fn(state_i) * lump_i.
FieldVector apply_lumped(const std::function<double(double)>& fn, const FieldVector& state,
                         const FieldVector& lump, double weight);

/// Spec-facing wrapper that computes the lumped measure internally.
FieldVector assemble_nonlinear(const TriMesh& mesh, const DofMap& dofs,
                               const std::function<double(double)>& fn, const FieldVector& state,
                               Region region, double weight);

/// Lumped load vector of a spatial function: out_i = weight * fn(x_i) * lump_i.
FieldVector assemble_load(const TriMesh& mesh, const DofMap& dofs,
                          const std::function<double(Vec2)>& fn, Region region, double weight);

/// One representative vertex position per dof (masters for periodic dofs).
std::vector<Vec2> dof_positions(const TriMesh& mesh, const DofMap& dofs);

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iter = 20000;
  bool deflate_constants = false;  // for the singular periodic Neumann system
};

struct CgResult {
  FieldVector x;
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Throws NumericalError carrying
/// the last residual if the iteration cap is hit.
CgResult solve_spd(const SparseMatrix& a, const FieldVector& b, const CgOptions& opts = {},
                   const FieldVector* x0 = nullptr);

}  // namespace perfhom
