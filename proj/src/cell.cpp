#include "perfhom/cell.hpp"

#include <cmath>

#include <json.hpp>

#include "perfhom/kernels.hpp"

namespace perfhom {

std::array<double, 2> HomogenizedCoefficients::q_eigenvalues() const {
  const double tr = q.a11 + q.a22;
  const double det = q.a11 * q.a22 - q.a12 * q.a21;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return {0.5 * tr - disc, 0.5 * tr + disc};
}

CellSystem build_cell_system(const UnitCell& cell, double h_target) {
  CellSystem sys;
  sys.pmesh = triangulate_cell(cell, h_target);
  sys.dofs = build_dofmap(sys.pmesh.base, std::nullopt, &sys.pmesh.pairing);
  sys.stiffness = assemble_stiffness(sys.pmesh.base, sys.dofs);
  sys.lump = lumped_measure(sys.pmesh.base, sys.dofs, Region::domain);
  return sys;
}

CorrectorField solve_cell_problem(const CellSystem& sys, int j, double cg_tol) {
  if (j != 1 && j != 2) throw ConfigError("corrector index must be 1 or 2");
  const TriMesh& mesh = sys.pmesh.base;
  const DofMap& dofs = sys.dofs;

  // Neumann load: b_i = int_{dF} n_j phi_i, with the outward normal of the
  // material (dy, -dx)/len of the material-left boundary edge.
  FieldVector b(static_cast<std::size_t>(dofs.n_dofs), 0.0);
  double perimeter = 0.0;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::hole) continue;
    const Vec2 d = mesh.vertices[e.b] - mesh.vertices[e.a];
    const double len = norm(d);
    perimeter += len;
    const double nj = (j == 1) ? d.y : -d.x;  // n * len
    const int da = dofs.vertex_to_dof[e.a];
    const int db = dofs.vertex_to_dof[e.b];
    if (da >= 0) b[static_cast<std::size_t>(da)] += 0.5 * nj;
    if (db >= 0) b[static_cast<std::size_t>(db)] += 0.5 * nj;
  }

  CorrectorField eta;
  eta.j = j;
  eta.values.assign(static_cast<std::size_t>(dofs.n_dofs), 0.0);
  if (perimeter == 0.0) return eta;  // no hole: zero Neumann data, eta = 0

  double compat = 0.0;
  for (double v : b) compat += v;
  if (std::abs(compat) > 1e-10 * perimeter)
    throw NumericalError("cell problem compatibility integral is nonzero: " +
                         std::to_string(compat));

  CgOptions opts;
  opts.rel_tol = cg_tol;
  opts.deflate_constants = true;
  CgResult sol = solve_spd(sys.stiffness, b, opts);
  eta.values = std::move(sol.x);

  // zero mean over Y*
  double area = 0.0, integral = 0.0;
  for (std::size_t i = 0; i < eta.values.size(); ++i) {
    area += sys.lump[i];
    integral += sys.lump[i] * eta.values[i];
  }
  const double shift = integral / area;
  for (double& v : eta.values) v -= shift;
  integral = 0.0;
  for (std::size_t i = 0; i < eta.values.size(); ++i) integral += sys.lump[i] * eta.values[i];
  eta.mean = integral;
  if (std::abs(eta.mean) > 1e-10)
    throw NumericalError("corrector mean did not normalize to zero");
  return eta;
}

namespace {

// int_{Y*} d(eta)/dy_i over the mesh, from the piecewise-constant gradients.
std::array<double, 2> gradient_integral(const CellSystem& sys, const FieldVector& eta) {
  const TriMesh& mesh = sys.pmesh.base;
  std::array<double, 2> out{0.0, 0.0};
  for (const auto& tr : mesh.triangles) {
    const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
    const double twice = cross(b - a, c - a);
    const Vec2 g0{(b.y - c.y) / twice, (c.x - b.x) / twice};
    const Vec2 g1{(c.y - a.y) / twice, (a.x - c.x) / twice};
    const Vec2 g2{(a.y - b.y) / twice, (b.x - a.x) / twice};
    double u0 = 0.0, u1 = 0.0, u2 = 0.0;
    const int d0 = sys.dofs.vertex_to_dof[tr[0]];
    const int d1 = sys.dofs.vertex_to_dof[tr[1]];
    const int d2 = sys.dofs.vertex_to_dof[tr[2]];
    if (d0 >= 0) u0 = eta[static_cast<std::size_t>(d0)];
    if (d1 >= 0) u1 = eta[static_cast<std::size_t>(d1)];
    if (d2 >= 0) u2 = eta[static_cast<std::size_t>(d2)];
    const double area = 0.5 * twice;
    out[0] += area * (u0 * g0.x + u1 * g1.x + u2 * g2.x);
    out[1] += area * (u0 * g0.y + u1 * g1.y + u2 * g2.y);
  }
  return out;
}

void validate_coefficients(const HomogenizedCoefficients& c) {
  if (std::abs(c.q.a12 - c.q.a21) > 1e-10)
    throw NumericalError("homogenized matrix is not symmetric");
  const auto ev = c.q_eigenvalues();
  if (!(ev[0] > 0.0))
    throw NumericalError("homogenized matrix is not positive definite");
  if (c.q.a11 > c.theta_star + 1e-8 || c.q.a22 > c.theta_star + 1e-8)
    throw NumericalError("homogenized diagonal exceeds the volume fraction bound");
  if (!(c.theta_star > 0.0 && c.theta_star <= 1.0) || c.sigma < 0.0)
    throw NumericalError("invalid volume fraction or surface density");
}

}  // namespace

HomogenizedCoefficients homogenized_matrix(const CellSystem& sys, const CorrectorField& eta1,
                                           const CorrectorField& eta2, const UnitCell& cell) {
  if (eta1.j != 1 || eta2.j != 2) throw ConfigError("correctors must be (eta_1, eta_2)");
  const auto g1 = gradient_integral(sys, eta1.values);
  const auto g2 = gradient_integral(sys, eta2.values);
  HomogenizedCoefficients c;
  c.q.a11 = cell.area_ystar - g1[0];
  c.q.a21 = -g1[1];
  c.q.a12 = -g2[0];
  c.q.a22 = cell.area_ystar - g2[1];
  c.theta_star = cell.area_ystar;
  c.sigma = cell.perimeter_df;
  validate_coefficients(c);
  return c;
}

double corrector_energy(const CellSystem& sys, const CorrectorField& eta) {
  const TriMesh& mesh = sys.pmesh.base;
  const Vec2 ej = (eta.j == 1) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  double energy = 0.0;
  for (const auto& tr : mesh.triangles) {
    const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
    const double twice = cross(b - a, c - a);
    const Vec2 g0{(b.y - c.y) / twice, (c.x - b.x) / twice};
    const Vec2 g1{(c.y - a.y) / twice, (a.x - c.x) / twice};
    const Vec2 g2{(a.y - b.y) / twice, (b.x - a.x) / twice};
    double u0 = 0.0, u1 = 0.0, u2 = 0.0;
    const int d0 = sys.dofs.vertex_to_dof[tr[0]];
    const int d1 = sys.dofs.vertex_to_dof[tr[1]];
    const int d2 = sys.dofs.vertex_to_dof[tr[2]];
    if (d0 >= 0) u0 = eta.values[static_cast<std::size_t>(d0)];
    if (d1 >= 0) u1 = eta.values[static_cast<std::size_t>(d1)];
    if (d2 >= 0) u2 = eta.values[static_cast<std::size_t>(d2)];
    const Vec2 grad{u0 * g0.x + u1 * g1.x + u2 * g2.x, u0 * g0.y + u1 * g1.y + u2 * g2.y};
    const Vec2 w = ej - grad;
    energy += 0.5 * twice * dot(w, w);
  }
  return energy;
}

HomogenizedCoefficients compute_coefficients(const UnitCell& cell, double h_target, double cg_tol) {
  const CellSystem sys = build_cell_system(cell, h_target);
  const CorrectorField eta1 = solve_cell_problem(sys, 1, cg_tol);
  const CorrectorField eta2 = solve_cell_problem(sys, 2, cg_tol);
  return homogenized_matrix(sys, eta1, eta2, cell);
}

std::string coefficients_to_json(const HomogenizedCoefficients& c) {
  nlohmann::ordered_json j;
  j["q"] = {{c.q.a11, c.q.a12}, {c.q.a21, c.q.a22}};
  j["theta_star"] = c.theta_star;
  j["sigma"] = c.sigma;
  return j.dump(2);
}

HomogenizedCoefficients coefficients_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  HomogenizedCoefficients c;
  c.q.a11 = j.at("q").at(0).at(0).get<double>();
  c.q.a12 = j.at("q").at(0).at(1).get<double>();
  c.q.a21 = j.at("q").at(1).at(0).get<double>();
  c.q.a22 = j.at("q").at(1).at(1).get<double>();
  c.theta_star = j.at("theta_star").get<double>();
  c.sigma = j.at("sigma").get<double>();
  return c;
}

}  // namespace perfhom
