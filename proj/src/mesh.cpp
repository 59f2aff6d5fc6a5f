#include "perfhom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace perfhom {

namespace {

constexpr double kPi = 3.14159265358979323846;

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

std::int64_t pack_pair(int a, int b) {
  return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}
std::int64_t pack_unordered(int a, int b) {
  return pack_pair(std::min(a, b), std::max(a, b));
}

// Hole-fitted mesh of the unit cell on an n x n background grid: union-jack
// structured quads outside a grid-aligned frame around the hole; inside the
// frame, blended rings zipped between the hole polygon and the frame edge.
struct CellTemplate {
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  std::vector<std::pair<int, int>> hole_pairs;  // consecutive dF loop pairs, CCW
  std::vector<std::pair<int, int>> grid_key;    // (-1,-1) for non-grid vertices
  int n = 0;

  int grid_vertex(int i, int j) {
    const auto key = pack_pair(i, j);
    auto it = grid_ids.find(key);
    if (it != grid_ids.end()) return it->second;
    const int id = add_vertex({static_cast<double>(i) / n, static_cast<double>(j) / n});
    grid_key[static_cast<std::size_t>(id)] = {i, j};
    grid_ids.emplace(key, id);
    return id;
  }

  int add_vertex(Vec2 p) {
    verts.push_back(p);
    grid_key.emplace_back(-1, -1);
    return static_cast<int>(verts.size()) - 1;
  }

  void add_triangle(int a, int b, int c) {
    if (signed_area(verts[a], verts[b], verts[c]) <= 0.0)
      throw NumericalError("cell template produced a degenerate or inverted triangle");
    tris.push_back({a, b, c});
  }

  void add_quad(int i, int j) {
    const int v00 = grid_vertex(i, j);
    const int v10 = grid_vertex(i + 1, j);
    const int v01 = grid_vertex(i, j + 1);
    const int v11 = grid_vertex(i + 1, j + 1);
    if ((i + j) % 2 == 0) {
      add_triangle(v00, v10, v11);
      add_triangle(v00, v11, v01);
    } else {
      add_triangle(v00, v10, v01);
      add_triangle(v10, v11, v01);
    }
  }

  std::unordered_map<std::int64_t, int> grid_ids;
};

double ray_hit_polygon(const std::vector<Vec2>& pts, Vec2 c, Vec2 dir) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t m = pts.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 p = pts[i];
    const Vec2 e = pts[(i + 1) % m] - p;
    const double denom = cross(dir, e);
    if (std::abs(denom) < 1e-30) continue;
    const double s = cross(p - c, e) / denom;
    const double t = cross(p - c, dir) / denom;
    if (s > 1e-12 && t >= -1e-9 && t <= 1.0 + 1e-9) best = std::min(best, s);
  }
  if (!std::isfinite(best)) throw NumericalError("ray cast missed the hole polygon");
  return best;
}

double ray_hit_rect(double fx0, double fy0, double fx1, double fy1, Vec2 c, Vec2 dir) {
  double best = std::numeric_limits<double>::infinity();
  if (dir.x > 1e-30) best = std::min(best, (fx1 - c.x) / dir.x);
  if (dir.x < -1e-30) best = std::min(best, (fx0 - c.x) / dir.x);
  if (dir.y > 1e-30) best = std::min(best, (fy1 - c.y) / dir.y);
  if (dir.y < -1e-30) best = std::min(best, (fy0 - c.y) / dir.y);
  return best;
}

// Cyclic angular merge of two nested star-shaped CCW loops. Near-coincident
// angles are normalized to inner-before-outer so mirrored inputs yield
// mirrored triangulations.
void zip_rings(CellTemplate& tpl, const std::vector<int>& inner, const std::vector<int>& outer,
               Vec2 center) {
  struct Ev {
    double ang;
    int which;  // 0 inner, 1 outer
    int vert;
  };
  auto angle_of = [&](int v) {
    double a = std::atan2(tpl.verts[v].y - center.y, tpl.verts[v].x - center.x);
    if (a < 0.0) a += 2.0 * kPi;
    return a;
  };
  std::vector<Ev> evs;
  evs.reserve(inner.size() + outer.size());
  for (int v : inner) evs.push_back({angle_of(v), 0, v});
  for (int v : outer) evs.push_back({angle_of(v), 1, v});
  std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) {
    if (a.ang != b.ang) return a.ang < b.ang;
    if (a.which != b.which) return a.which < b.which;
    return a.vert < b.vert;
  });
  constexpr double kTie = 1e-9;
  for (std::size_t i = 0; i + 1 < evs.size(); ++i) {
    if (evs[i].which == 1 && evs[i + 1].which == 0 && evs[i + 1].ang - evs[i].ang < kTie)
      std::swap(evs[i], evs[i + 1]);
  }

  int cur_inner = -1, cur_outer = -1;
  for (auto it = evs.rbegin(); it != evs.rend() && (cur_inner < 0 || cur_outer < 0); ++it) {
    if (it->which == 0 && cur_inner < 0) cur_inner = it->vert;
    if (it->which == 1 && cur_outer < 0) cur_outer = it->vert;
  }
  for (const Ev& e : evs) {
    if (e.which == 0) {
      tpl.add_triangle(cur_inner, cur_outer, e.vert);
      cur_inner = e.vert;
    } else {
      tpl.add_triangle(cur_outer, e.vert, cur_inner);
      cur_outer = e.vert;
    }
  }
}

CellTemplate make_solid_template(int n) {
  CellTemplate tpl;
  tpl.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) tpl.add_quad(i, j);
  return tpl;
}

CellTemplate make_cell_template(const UnitCell& cell, int n) {
  if (!cell.has_hole()) return make_solid_template(n);

  const double g = 1.0 / n;
  const std::vector<Vec2>& poly = cell.hole_polygon.pts;
  double bx0 = 1.0, by0 = 1.0, bx1 = 0.0, by1 = 0.0;
  for (const Vec2& p : poly) {
    bx0 = std::min(bx0, p.x);
    by0 = std::min(by0, p.y);
    bx1 = std::max(bx1, p.x);
    by1 = std::max(by1, p.y);
  }
  const double margin = 0.4 * g;
  const int fi0 = std::max(static_cast<int>(std::floor((bx0 - margin) * n)), 1);
  const int fj0 = std::max(static_cast<int>(std::floor((by0 - margin) * n)), 1);
  const int fi1 = std::min(static_cast<int>(std::ceil((bx1 + margin) * n)), n - 1);
  const int fj1 = std::min(static_cast<int>(std::ceil((by1 + margin) * n)), n - 1);
  if (fi1 - fi0 < 1 || fj1 - fj0 < 1)
    throw ConfigError("h_target too coarse to carve a frame around the hole");
  const double fx0 = static_cast<double>(fi0) / n, fy0 = static_cast<double>(fj0) / n;
  const double fx1 = static_cast<double>(fi1) / n, fy1 = static_cast<double>(fj1) / n;
  double clearance = 1.0;
  for (const Vec2& p : poly)
    clearance = std::min({clearance, p.x - fx0, fx1 - p.x, p.y - fy0, fy1 - p.y});
  if (clearance < 0.15 * g)
    throw ConfigError("h_target too coarse to resolve the hole inside its cell");

  CellTemplate tpl;
  tpl.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(i >= fi0 && i < fi1 && j >= fj0 && j < fj1)) tpl.add_quad(i, j);

  // inner loop: the hole polygon with edges split to roughly the grid pitch
  std::vector<int> inner_loop;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % m];
    const int pieces = std::max(1, static_cast<int>(std::ceil(norm(q - p) / g - 1e-12)));
    for (int t = 0; t < pieces; ++t) {
      const double s = static_cast<double>(t) / pieces;
      inner_loop.push_back(tpl.add_vertex({p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)}));
    }
  }
  for (std::size_t i = 0; i < inner_loop.size(); ++i)
    tpl.hole_pairs.emplace_back(inner_loop[i], inner_loop[(i + 1) % inner_loop.size()]);

  // frame loop, CCW from the bottom-left frame corner
  std::vector<int> frame_loop;
  for (int i = fi0; i < fi1; ++i) frame_loop.push_back(tpl.grid_vertex(i, fj0));
  for (int j = fj0; j < fj1; ++j) frame_loop.push_back(tpl.grid_vertex(fi1, j));
  for (int i = fi1; i > fi0; --i) frame_loop.push_back(tpl.grid_vertex(i, fj1));
  for (int j = fj1; j > fj0; --j) frame_loop.push_back(tpl.grid_vertex(fi0, j));

  const Vec2 c = cell.hole.center;
  {
    const std::size_t n_probe = 64;
    const std::vector<Vec2> probe = unit_circle_directions(static_cast<int>(n_probe));
    double gap_sum = 0.0;
    for (const Vec2& d : probe)
      gap_sum += ray_hit_rect(fx0, fy0, fx1, fy1, c, d) - ray_hit_polygon(poly, c, d);
    const double gap_avg = gap_sum / static_cast<double>(n_probe);

    // Ring counts grade geometrically between the loop counts so adjacent
    // rings never differ by more than a factor two; ring spacing tracks the
    // grid pitch.
    const double n_in = static_cast<double>(inner_loop.size());
    const double n_out = static_cast<double>(frame_loop.size());
    const int k_gap = static_cast<int>(std::lround(gap_avg / g));
    const int k_count = static_cast<int>(std::ceil(std::abs(std::log2(n_out / n_in))));
    const int rings = std::clamp(std::max(k_gap, k_count), 1, 4096);

    std::vector<std::vector<int>> loops;
    loops.push_back(std::move(inner_loop));
    for (int k = 1; k < rings; ++k) {
      const double t = static_cast<double>(k) / rings;
      int nk = static_cast<int>(std::lround(std::pow(n_in, 1.0 - t) * std::pow(n_out, t)));
      nk = std::max(8, ((nk + 3) / 4) * 4);
      const std::vector<Vec2> dirs = unit_circle_directions(nk);
      std::vector<int> ring;
      ring.reserve(dirs.size());
      for (const Vec2& d : dirs) {
        const double r = (1.0 - t) * ray_hit_polygon(poly, c, d) +
                         t * ray_hit_rect(fx0, fy0, fx1, fy1, c, d);
        ring.push_back(tpl.add_vertex(c + r * d));
      }
      loops.push_back(std::move(ring));
    }
    loops.push_back(std::move(frame_loop));

    for (std::size_t k = 0; k + 1 < loops.size(); ++k) zip_rings(tpl, loops[k], loops[k + 1], c);
  }

  return tpl;
}

// Boundary edges are whatever is incident to exactly one triangle, oriented
// as in that triangle (material left). Tags come from the known dF pairs;
// everything else must sit on the outer boundary.
void derive_boundary_edges(TriMesh& mesh, const std::unordered_set<std::int64_t>& hole_pairs) {
  std::unordered_map<std::int64_t, int> count;
  std::unordered_map<std::int64_t, std::pair<int, int>> oriented;
  for (const auto& tr : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = tr[e], b = tr[(e + 1) % 3];
      const auto key = pack_unordered(a, b);
      if (++count[key] == 1) oriented[key] = {a, b};
    }
  }
  mesh.boundary_edges.clear();
  std::vector<std::int64_t> keys;
  for (const auto& [key, c] : count) {
    if (c == 1) keys.push_back(key);
    else if (c > 2) throw NumericalError("non-manifold edge in generated mesh");
  }
  std::sort(keys.begin(), keys.end());
  for (const auto key : keys) {
    const auto [a, b] = oriented[key];
    const BoundaryTag tag = hole_pairs.count(key) ? BoundaryTag::hole : BoundaryTag::outer;
    mesh.boundary_edges.push_back({a, b, tag});
  }
}

const char* tag_name(BoundaryTag t) { return t == BoundaryTag::hole ? "HOLE" : "OUTER"; }

}  // namespace

double TriMesh::triangle_area(int t) const {
  const auto& tr = triangles[static_cast<std::size_t>(t)];
  return signed_area(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += triangle_area(t);
  return s;
}

double TriMesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& tr : triangles)
    for (int e = 0; e < 3; ++e)
      m = std::max(m, norm(vertices[tr[(e + 1) % 3]] - vertices[tr[e]]));
  return m;
}

double TriMesh::min_angle_deg() const {
  double best = 180.0;
  for (const auto& tr : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = vertices[tr[k]];
      const Vec2 u = vertices[tr[(k + 1) % 3]] - a;
      const Vec2 v = vertices[tr[(k + 2) % 3]] - a;
      const double ang = std::acos(std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0));
      best = std::min(best, ang * 180.0 / kPi);
    }
  }
  return best;
}

double TriMesh::boundary_length(BoundaryTag tag) const {
  double len = 0.0;
  for (const BoundaryEdge& e : boundary_edges)
    if (e.tag == tag) len += norm(vertices[e.b] - vertices[e.a]);
  return len;
}

int TriMesh::count_boundary_loops() const {
  std::unordered_map<int, int> next;
  for (const BoundaryEdge& e : boundary_edges) next[e.a] = e.b;
  std::unordered_set<int> seen;
  int loops = 0;
  for (const auto& [a, b] : next) {
    (void)b;
    if (seen.count(a)) continue;
    ++loops;
    int v = a;
    while (!seen.count(v)) {
      seen.insert(v);
      auto it = next.find(v);
      if (it == next.end()) throw NumericalError("boundary edges do not close into loops");
      v = it->second;
    }
  }
  return loops;
}

PeriodicMesh triangulate_cell(const UnitCell& cell, double h_target) {
  if (!(h_target > 0.0) || h_target > 1.0) throw ConfigError("invalid cell h_target");
  if (cell.has_hole() && h_target >= hole_clearance(cell))
    throw ConfigError("cell h_target must be below the hole's clearance to the cell boundary");

  int n = static_cast<int>(std::ceil(1.0 / h_target - 1e-12));
  if (n % 2 == 1) ++n;  // even grid keeps the union-jack pattern mirror symmetric
  CellTemplate tpl = make_cell_template(cell, n);

  PeriodicMesh pm;
  pm.base.vertices = std::move(tpl.verts);
  pm.base.triangles = std::move(tpl.tris);
  std::unordered_set<std::int64_t> hole_keys;
  for (const auto& [a, b] : tpl.hole_pairs) hole_keys.insert(pack_unordered(a, b));
  derive_boundary_edges(pm.base, hole_keys);

  // pairing: far faces (i=n or j=n) are slaves of the near faces
  for (int j = 1; j < n; ++j) {
    auto r = tpl.grid_ids.find(pack_pair(n, j));
    auto l = tpl.grid_ids.find(pack_pair(0, j));
    if (r == tpl.grid_ids.end() || l == tpl.grid_ids.end())
      throw NumericalError("periodic face vertex missing");
    pm.pairing.emplace_back(r->second, l->second);
  }
  for (int i = 1; i < n; ++i) {
    auto t = tpl.grid_ids.find(pack_pair(i, n));
    auto b = tpl.grid_ids.find(pack_pair(i, 0));
    if (t == tpl.grid_ids.end() || b == tpl.grid_ids.end())
      throw NumericalError("periodic face vertex missing");
    pm.pairing.emplace_back(t->second, b->second);
  }
  const int c00 = tpl.grid_ids.at(pack_pair(0, 0));
  const int c10 = tpl.grid_ids.at(pack_pair(n, 0));
  const int c01 = tpl.grid_ids.at(pack_pair(0, n));
  const int c11 = tpl.grid_ids.at(pack_pair(n, n));
  pm.pairing.emplace_back(c10, c00);
  pm.pairing.emplace_back(c01, c00);
  pm.pairing.emplace_back(c11, c01);
  return pm;
}

TriMesh triangulate_perforated(const PerforatedDomain& domain, double h_target) {
  if (!(h_target > 0.0)) throw ConfigError("invalid h_target");
  if (h_target > domain.epsilon / 4.0 + 1e-12)
    throw ConfigError("h_target must be at most epsilon/4 to resolve each hole");
  const int nc = static_cast<int>(std::ceil(domain.epsilon / h_target - 1e-12));

  const CellTemplate solid = make_solid_template(nc);
  CellTemplate holed;
  if (domain.cell.has_hole()) holed = make_cell_template(domain.cell, nc);

  std::unordered_set<std::int64_t> hole_cells;
  for (const auto& [kx, ky] : domain.holes) hole_cells.insert(pack_pair(kx, ky));

  const double eps = domain.epsilon;
  const Rect& box = domain.outer;
  const int nx = domain.cells_x, ny = domain.cells_y;

  TriMesh mesh;
  std::unordered_map<std::int64_t, int> face_ids;  // global grid key -> vertex id
  std::unordered_set<std::int64_t> hole_keys;
  std::vector<int> remap;

  for (int kx = 0; kx < nx; ++kx) {
    for (int ky = 0; ky < ny; ++ky) {
      const CellTemplate& tpl =
          hole_cells.count(pack_pair(kx, ky)) ? holed : solid;
      remap.assign(tpl.verts.size(), -1);
      for (std::size_t v = 0; v < tpl.verts.size(); ++v) {
        const auto [i, j] = tpl.grid_key[v];
        const bool on_face = (i >= 0) && (i == 0 || i == nc || j == 0 || j == nc);
        if (on_face) {
          const std::int64_t key = pack_pair(kx * nc + i, ky * nc + j);
          auto it = face_ids.find(key);
          if (it != face_ids.end()) {
            remap[v] = it->second;
            continue;
          }
          const double x = box.x0 + eps * (static_cast<double>(kx * nc + i) / nc);
          const double y = box.y0 + eps * (static_cast<double>(ky * nc + j) / nc);
          mesh.vertices.push_back({x, y});
          remap[v] = static_cast<int>(mesh.vertices.size()) - 1;
          face_ids.emplace(key, remap[v]);
        } else {
          mesh.vertices.push_back({box.x0 + eps * (kx + tpl.verts[v].x),
                                   box.y0 + eps * (ky + tpl.verts[v].y)});
          remap[v] = static_cast<int>(mesh.vertices.size()) - 1;
        }
      }
      for (const auto& tr : tpl.tris)
        mesh.triangles.push_back({remap[tr[0]], remap[tr[1]], remap[tr[2]]});
      for (const auto& [a, b] : tpl.hole_pairs)
        hole_keys.insert(pack_unordered(remap[a], remap[b]));
    }
  }

  derive_boundary_edges(mesh, hole_keys);
  return mesh;
}

TriMesh triangulate_rect(const Rect& rect, double h_target) {
  if (!(h_target > 0.0)) throw ConfigError("invalid h_target");
  const int nx = std::max(1, static_cast<int>(std::ceil(rect.width() / h_target - 1e-12)));
  const int ny = std::max(1, static_cast<int>(std::ceil(rect.height() / h_target - 1e-12)));

  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back({rect.x0 + rect.width() * (static_cast<double>(i) / nx),
                               rect.y0 + rect.height() * (static_cast<double>(j) / ny)});
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      } else {
        mesh.triangles.push_back({v00, v10, v01});
        mesh.triangles.push_back({v10, v11, v01});
      }
    }
  }
  derive_boundary_edges(mesh, {});
  mesh.structured = true;
  mesh.grid_box = rect;
  mesh.grid_nx = nx;
  mesh.grid_ny = ny;
  return mesh;
}

DofMap build_dofmap(const TriMesh& mesh, std::optional<BoundaryTag> dirichlet_tag,
                    const std::vector<std::pair<int, int>>* pairing) {
  const int nv = static_cast<int>(mesh.vertices.size());
  std::vector<int> parent(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) parent[static_cast<std::size_t>(v)] = v;
  if (pairing) {
    for (const auto& [slave, master] : *pairing) parent[static_cast<std::size_t>(slave)] = master;
  }
  auto root = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
    return v;
  };

  std::vector<char> constrained(static_cast<std::size_t>(nv), 0);
  if (dirichlet_tag) {
    for (const BoundaryEdge& e : mesh.boundary_edges) {
      if (e.tag == *dirichlet_tag) {
        constrained[static_cast<std::size_t>(root(e.a))] = 1;
        constrained[static_cast<std::size_t>(root(e.b))] = 1;
      }
    }
  }

  DofMap map;
  map.vertex_to_dof.assign(static_cast<std::size_t>(nv), kConstrainedDof);
  std::vector<int> root_dof(static_cast<std::size_t>(nv), -2);
  int next = 0;
  for (int v = 0; v < nv; ++v) {
    const int r = root(v);
    if (constrained[static_cast<std::size_t>(r)]) continue;
    if (root_dof[static_cast<std::size_t>(r)] == -2) root_dof[static_cast<std::size_t>(r)] = next++;
    map.vertex_to_dof[static_cast<std::size_t>(v)] = root_dof[static_cast<std::size_t>(r)];
  }
  map.n_dofs = next;
  return map;
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  char buf[80];
  for (const Vec2& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", p.x, p.y);
    os << buf;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "t %d %d %d\n", t[0], t[1], t[2]);
    os << buf;
  }
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    std::snprintf(buf, sizeof buf, "b %d %d %s\n", e.a, e.b, tag_name(e.tag));
    os << buf;
  }
}

TriMesh read_mesh(std::istream& is) {
  TriMesh mesh;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "v") {
      Vec2 p;
      ls >> p.x >> p.y;
      mesh.vertices.push_back(p);
    } else if (kind == "t") {
      std::array<int, 3> t{};
      ls >> t[0] >> t[1] >> t[2];
      mesh.triangles.push_back(t);
    } else if (kind == "b") {
      BoundaryEdge e;
      std::string tag;
      ls >> e.a >> e.b >> tag;
      if (tag == "HOLE") e.tag = BoundaryTag::hole;
      else if (tag == "OUTER") e.tag = BoundaryTag::outer;
      else throw ConfigError("unknown boundary tag in mesh file: " + tag);
      mesh.boundary_edges.push_back(e);
    } else if (kind == "s") {
      continue;  // snapshot values are ignored by the mesh reader
    } else {
      throw ConfigError("unknown record in mesh file: " + kind);
    }
    if (ls.fail()) throw ConfigError("malformed mesh file line: " + line);
  }
  return mesh;
}

double eval_p1(const TriMesh& donor, const std::vector<double>& vertex_values, Vec2 p) {
  if (!donor.structured) throw NumericalError("eval_p1 requires a structured donor mesh");
  const Rect& box = donor.grid_box;
  const int nx = donor.grid_nx, ny = donor.grid_ny;
  const double gx = box.width() / nx, gy = box.height() / ny;
  const int i = std::clamp(static_cast<int>(std::floor((p.x - box.x0) / gx)), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y - box.y0) / gy)), 0, ny - 1);
  const std::size_t quad = 2 * (static_cast<std::size_t>(j) * nx + i);

  double best_val = 0.0;
  double best_min = -std::numeric_limits<double>::infinity();
  for (std::size_t t = quad; t < quad + 2 && t < donor.triangles.size(); ++t) {
    const auto& tr = donor.triangles[t];
    const Vec2 a = donor.vertices[tr[0]], b = donor.vertices[tr[1]], c = donor.vertices[tr[2]];
    const double area = signed_area(a, b, c);
    const double l0 = signed_area(p, b, c) / area;
    const double l1 = signed_area(a, p, c) / area;
    const double l2 = signed_area(a, b, p) / area;
    const double mn = std::min({l0, l1, l2});
    if (mn > best_min) {
      best_min = mn;
      best_val = l0 * vertex_values[tr[0]] + l1 * vertex_values[tr[1]] + l2 * vertex_values[tr[2]];
    }
  }
  if (best_min < -1e-9)
    throw NumericalError("point location failed on structured donor mesh");
  return best_val;
}

std::vector<double> dof_to_vertex_values(const TriMesh& mesh, const DofMap& dofs,
                                         const std::vector<double>& u) {
  std::vector<double> out(mesh.vertices.size(), 0.0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const int d = dofs.vertex_to_dof[v];
    if (d >= 0) out[v] = u[static_cast<std::size_t>(d)];
  }
  return out;
}

}  // namespace perfhom
