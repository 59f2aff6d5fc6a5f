#include "perfhom/parabolic.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "perfhom/kernels.hpp"

namespace perfhom {

namespace {

int step_count(double t_final, double dt) {
  if (t_final <= 0.0) return 0;
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  return std::max(1, static_cast<int>(std::lround(t_final / dt)));
}

double combined_norm(const SparseMatrix& m, const FieldVector& u) {
  return std::sqrt(std::max(0.0, m.quadratic_form(u)));
}

void check_finite(const StepDiagnostics& d) {
  if (!std::isfinite(d.l2) || !std::isfinite(d.boundary_l2) || !std::isfinite(d.h1_semi) ||
      !std::isfinite(d.energy_residual))
    throw NumericalError("non-finite trajectory diagnostic");
}

FieldVector interpolate_initial(const std::vector<Vec2>& pos, const SpaceFn& u0) {
  FieldVector u(pos.size(), 0.0);
  for (std::size_t i = 0; i < pos.size(); ++i) u[i] = u0(pos[i]);
  return u;
}

}  // namespace

EpsilonOperators build_epsilon_operators(const PerforatedDomain& domain, const ProblemData& data,
                                         double h_target, double dt) {
  EpsilonOperators ops;
  ops.mesh = triangulate_perforated(domain, h_target);
  ops.dofs = build_dofmap(ops.mesh, BoundaryTag::outer);
  ops.mass = assemble_mass(ops.mesh, ops.dofs);
  ops.boundary_mass = assemble_boundary_mass(ops.mesh, ops.dofs, BoundaryTag::hole, domain.epsilon);
  ops.stiffness = assemble_stiffness(ops.mesh, ops.dofs);
  ops.mass_total = csr_lincomb({{1.0, &ops.mass}, {1.0, &ops.boundary_mass}});
  ops.system = csr_lincomb({{1.0 + dt * data.kappa, &ops.mass},
                            {1.0, &ops.boundary_mass},
                            {dt, &ops.stiffness}});
  ops.lump_domain = lumped_measure(ops.mesh, ops.dofs, Region::domain);
  ops.lump_hole = lumped_measure(ops.mesh, ops.dofs, Region::hole_boundary);
  ops.dof_pos = dof_positions(ops.mesh, ops.dofs);
  ops.epsilon = domain.epsilon;
  ops.dt = dt;
  ops.kappa = data.kappa;
  return ops;
}

namespace {

// rhs contribution dt*(load_h + eps load_rho - N_f(u) - eps N_g(u)) evaluated
// with the lagged state u.
FieldVector epsilon_rhs(const EpsilonOperators& ops, const ProblemData& data,
                        const FieldVector& lagged, double t_next) {
  const std::size_t n = lagged.size();
  FieldVector rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    if (ops.lump_domain[i] != 0.0) {
      v += ops.lump_domain[i] * (data.h(ops.dof_pos[i], t_next) - data.nonlin.f(lagged[i]));
    }
    if (ops.lump_hole[i] != 0.0) {
      v += ops.epsilon * ops.lump_hole[i] *
           (data.rho(ops.dof_pos[i], t_next) - data.nonlin.g(lagged[i]));
    }
    rhs[i] = ops.dt * v;
  }
  return rhs;
}

}  // namespace

FieldVector step_epsilon(const EpsilonOperators& ops, const ProblemData& data,
                         const FieldVector& state, double t_next, const SolveOptions& opts,
                         double blowup_threshold) {
  const std::size_t n = state.size();
  FieldVector base(n, 0.0);
  ops.mass_total.mul(state, base);

  CgOptions cg;
  cg.rel_tol = opts.cg_tol;
  FieldVector u_new = state;
  for (int sweep = 0; sweep <= opts.fixedpoint_iters; ++sweep) {
    const FieldVector& lagged = (sweep == 0) ? state : u_new;
    FieldVector rhs = epsilon_rhs(ops, data, lagged, t_next);
    kernels::axpy(1.0, base, rhs);
    u_new = solve_spd(ops.system, rhs, cg, &u_new).x;
  }

  const double nrm = combined_norm(ops.mass_total, u_new);
  if (!std::isfinite(nrm) || nrm > blowup_threshold)
    throw NumericalError("eps-problem step exceeded the blow-up guard (norm " +
                         std::to_string(nrm) + ")");
  return u_new;
}

double energy_residual(const EpsilonOperators& ops, const ProblemData& data,
                       const FieldVector& u_old, const FieldVector& u_new, double t_next) {
  const std::size_t n = u_new.size();
  const double e_new = ops.mass_total.quadratic_form(u_new);
  const double e_old = ops.mass_total.quadratic_form(u_old);
  double r = 0.5 * (e_new - e_old) / ops.dt;
  r += ops.stiffness.quadratic_form(u_new);
  r += ops.kappa * ops.mass.quadratic_form(u_new);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    if (ops.lump_domain[i] != 0.0)
      v += ops.lump_domain[i] * (data.nonlin.f(u_new[i]) - data.h(ops.dof_pos[i], t_next));
    if (ops.lump_hole[i] != 0.0)
      v += ops.epsilon * ops.lump_hole[i] *
           (data.nonlin.g(u_new[i]) - data.rho(ops.dof_pos[i], t_next));
    r += v * u_new[i];
  }
  return std::abs(r);
}

EpsilonRun run_epsilon(const PerforatedDomain& domain, const ProblemData& data, double h_target,
                       double dt, const SolveOptions& opts) {
  EpsilonRun run;
  run.domain = domain;
  const int steps = step_count(data.T_final, dt);
  run.ops = build_epsilon_operators(domain, data, h_target, steps > 0 ? data.T_final / steps : dt);
  EpsilonOperators& ops = run.ops;

  FieldVector u = interpolate_initial(ops.dof_pos, data.u0);
  if (data.psi0) {
    for (std::size_t i = 0; i < u.size(); ++i)
      if (ops.lump_hole[i] != 0.0) u[i] = (*data.psi0)(ops.dof_pos[i]);
  }

  const double guard = opts.blowup_factor * std::max(1.0, combined_norm(ops.mass_total, u));

  Trajectory& traj = run.trajectory;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(u);
  StepDiagnostics d0;
  d0.l2 = combined_norm(ops.mass, u);
  d0.boundary_l2 = combined_norm(ops.boundary_mass, u);
  d0.h1_semi = combined_norm(ops.stiffness, u);
  check_finite(d0);
  traj.diagnostics.push_back(d0);

  for (int s = 1; s <= steps; ++s) {
    const double t = ops.dt * s;
    FieldVector u_new = step_epsilon(ops, data, u, t, opts, guard);
    StepDiagnostics d;
    d.l2 = combined_norm(ops.mass, u_new);
    d.boundary_l2 = combined_norm(ops.boundary_mass, u_new);
    d.h1_semi = combined_norm(ops.stiffness, u_new);
    d.energy_residual = energy_residual(ops, data, u, u_new, t);
    check_finite(d);
    traj.times.push_back(t);
    traj.snapshots.push_back(u_new);
    traj.diagnostics.push_back(d);
    u = std::move(u_new);
  }
  return run;
}

HomogenizedOperators build_homogenized_operators(const Rect& omega, const ProblemData& data,
                                                 const HomogenizedCoefficients& coeffs,
                                                 double h_target, double dt) {
  HomogenizedOperators ops;
  ops.mesh = triangulate_rect(omega, h_target);
  ops.dofs = build_dofmap(ops.mesh, BoundaryTag::outer);
  ops.mass = assemble_mass(ops.mesh, ops.dofs);
  ops.stiffness_q = assemble_stiffness_q(ops.mesh, ops.dofs, coeffs.q);
  ops.stiffness = assemble_stiffness(ops.mesh, ops.dofs);
  const double ct = coeffs.theta_star + coeffs.sigma;
  ops.mass_weighted = csr_lincomb({{ct, &ops.mass}});
  ops.system = csr_lincomb({{ct + dt * data.kappa * coeffs.theta_star, &ops.mass},
                            {dt, &ops.stiffness_q}});
  ops.lump_domain = lumped_measure(ops.mesh, ops.dofs, Region::domain);
  ops.dof_pos = dof_positions(ops.mesh, ops.dofs);
  ops.coeffs = coeffs;
  ops.dt = dt;
  ops.kappa = data.kappa;
  return ops;
}

namespace {

FieldVector homogenized_rhs(const HomogenizedOperators& ops, const ProblemData& data,
                            const FieldVector& lagged, double t_next) {
  const double ts = ops.coeffs.theta_star;
  const double sg = ops.coeffs.sigma;
  FieldVector rhs(lagged.size(), 0.0);
  for (std::size_t i = 0; i < lagged.size(); ++i) {
    if (ops.lump_domain[i] == 0.0) continue;
    const Vec2 x = ops.dof_pos[i];
    const double v = ts * (data.h(x, t_next) - data.nonlin.f(lagged[i])) +
                     sg * (data.rho(x, t_next) - data.nonlin.g(lagged[i]));
    rhs[i] = ops.dt * ops.lump_domain[i] * v;
  }
  return rhs;
}

}  // namespace

FieldVector step_homogenized(const HomogenizedOperators& ops, const ProblemData& data,
                             const FieldVector& state, double t_next, const SolveOptions& opts,
                             double blowup_threshold) {
  FieldVector base(state.size(), 0.0);
  ops.mass_weighted.mul(state, base);

  CgOptions cg;
  cg.rel_tol = opts.cg_tol;
  FieldVector u_new = state;
  for (int sweep = 0; sweep <= opts.fixedpoint_iters; ++sweep) {
    const FieldVector& lagged = (sweep == 0) ? state : u_new;
    FieldVector rhs = homogenized_rhs(ops, data, lagged, t_next);
    kernels::axpy(1.0, base, rhs);
    u_new = solve_spd(ops.system, rhs, cg, &u_new).x;
  }

  const double nrm = combined_norm(ops.mass_weighted, u_new);
  if (!std::isfinite(nrm) || nrm > blowup_threshold)
    throw NumericalError("homogenized step exceeded the blow-up guard (norm " +
                         std::to_string(nrm) + ")");
  return u_new;
}

double energy_residual_homogenized(const HomogenizedOperators& ops, const ProblemData& data,
                                   const FieldVector& u_old, const FieldVector& u_new,
                                   double t_next) {
  const double ts = ops.coeffs.theta_star;
  const double sg = ops.coeffs.sigma;
  const double e_new = ops.mass_weighted.quadratic_form(u_new);
  const double e_old = ops.mass_weighted.quadratic_form(u_old);
  double r = 0.5 * (e_new - e_old) / ops.dt;
  r += ops.stiffness_q.quadratic_form(u_new);
  r += ops.kappa * ts * ops.mass.quadratic_form(u_new);
  for (std::size_t i = 0; i < u_new.size(); ++i) {
    if (ops.lump_domain[i] == 0.0) continue;
    const Vec2 x = ops.dof_pos[i];
    const double v = ts * (data.nonlin.f(u_new[i]) - data.h(x, t_next)) +
                     sg * (data.nonlin.g(u_new[i]) - data.rho(x, t_next));
    r += ops.lump_domain[i] * v * u_new[i];
  }
  return std::abs(r);
}

HomogenizedRun run_homogenized(const ProblemData& data, const HomogenizedCoefficients& coeffs,
                               const Rect& omega, double h_target, double dt,
                               const SolveOptions& opts) {
  HomogenizedRun run;
  const int steps = step_count(data.T_final, dt);
  run.ops = build_homogenized_operators(omega, data, coeffs, h_target,
                                        steps > 0 ? data.T_final / steps : dt);
  HomogenizedOperators& ops = run.ops;

  FieldVector u = interpolate_initial(ops.dof_pos, data.u0);
  const double guard = opts.blowup_factor * std::max(1.0, combined_norm(ops.mass_weighted, u));

  Trajectory& traj = run.trajectory;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(u);
  StepDiagnostics d0;
  d0.l2 = combined_norm(ops.mass, u);
  d0.h1_semi = combined_norm(ops.stiffness, u);
  check_finite(d0);
  traj.diagnostics.push_back(d0);

  for (int s = 1; s <= steps; ++s) {
    const double t = ops.dt * s;
    FieldVector u_new = step_homogenized(ops, data, u, t, opts, guard);
    StepDiagnostics d;
    d.l2 = combined_norm(ops.mass, u_new);
    d.h1_semi = combined_norm(ops.stiffness, u_new);
    d.energy_residual = energy_residual_homogenized(ops, data, u, u_new, t);
    check_finite(d);
    traj.times.push_back(t);
    traj.snapshots.push_back(u_new);
    traj.diagnostics.push_back(d);
    u = std::move(u_new);
  }
  return run;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "time,l2_norm,boundary_l2_norm,h1_seminorm,energy_residual\n";
  char buf[200];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const StepDiagnostics& d = traj.diagnostics[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.times[i], d.l2,
                  d.boundary_l2, d.h1_semi, d.energy_residual);
    os << buf;
  }
}

void write_snapshot(std::ostream& os, const TriMesh& mesh, const DofMap& dofs,
                    const FieldVector& u) {
  write_mesh(os, mesh);
  const std::vector<double> vals = dof_to_vertex_values(mesh, dofs, u);
  char buf[80];
  for (std::size_t v = 0; v < vals.size(); ++v) {
    std::snprintf(buf, sizeof buf, "s %zu %.17g\n", v, vals[v]);
    os << buf;
  }
}

}  // namespace perfhom
