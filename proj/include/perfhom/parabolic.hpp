#pragma once

#include <functional>
#include <iosfwd>
#include <optional>

#include "perfhom/cell.hpp"

namespace perfhom {

using SpaceFn = std::function<double(Vec2)>;
using SpaceTimeFn = std::function<double(Vec2, double)>;

struct ProblemData {
  double kappa = 1.0;
  Nonlinearity nonlin;
  SpaceTimeFn h;    // interior forcing
  SpaceTimeFn rho;  // boundary forcing, vanishing on the outer boundary
  SpaceFn u0;       // initial datum, vanishing on the outer boundary
  std::optional<SpaceFn> psi0;  // optional hole-boundary initial datum
  double T_final = 0.25;
};

struct StepDiagnostics {
  double l2 = 0.0;           // sqrt(u^T M u)
  double boundary_l2 = 0.0;  // sqrt(u^T B u), eps-weighted
  double h1_semi = 0.0;      // sqrt(u^T A u)
  double energy_residual = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FieldVector> snapshots;
  std::vector<StepDiagnostics> diagnostics;
};

struct SolveOptions {
  double cg_tol = 1e-10;
  int fixedpoint_iters = 0;  // extra re-evaluations of the lagged terms
  double blowup_factor = 1e6;
};

// Pre-assembled operators of the eps-problem on a mesh of Omega_eps with
// homogeneous Dirichlet data on the outer boundary. B carries the eps weight.
struct EpsilonOperators {
  TriMesh mesh;
  DofMap dofs;
  SparseMatrix mass;           // (u, v) over Omega_eps
  SparseMatrix boundary_mass;  // eps (u, v) over dF_eps
  SparseMatrix stiffness;
  SparseMatrix mass_total;     // M + B
  SparseMatrix system;         // M + B + dt (A + kappa M)
  FieldVector lump_domain;
  FieldVector lump_hole;       // unweighted; the eps factor is applied in the step
  std::vector<Vec2> dof_pos;
  double epsilon = 0.0;
  double dt = 0.0;
  double kappa = 0.0;
};

EpsilonOperators build_epsilon_operators(const PerforatedDomain& domain, const ProblemData& data,
                                         double h_target, double dt);

/// One semi-implicit backward-Euler step of the eps-problem:
///   (M + B + dt (A + kappa M)) u1 = (M + B) u0
///       + dt (load_h + eps load_rho - N_f(u0) - eps N_g(u0)).
FieldVector step_epsilon(const EpsilonOperators& ops, const ProblemData& data,
                         const FieldVector& state, double t_next, const SolveOptions& opts,
                         double blowup_threshold);

/// Discrete defect of the energy equality across one accepted step.
double energy_residual(const EpsilonOperators& ops, const ProblemData& data,
                       const FieldVector& u_old, const FieldVector& u_new, double t_next);

struct EpsilonRun {
  PerforatedDomain domain;
  EpsilonOperators ops;
  Trajectory trajectory;
};

EpsilonRun run_epsilon(const PerforatedDomain& domain, const ProblemData& data, double h_target,
                       double dt, const SolveOptions& opts = {});

// Homogenized limit problem on the unperforated Omega mesh.
struct HomogenizedOperators {
  TriMesh mesh;
  DofMap dofs;
  SparseMatrix mass;
  SparseMatrix stiffness_q;  // int Q grad(u) . grad(v)
  SparseMatrix stiffness;    // unweighted, for diagnostics
  SparseMatrix mass_weighted;  // (theta* + sigma) M
  SparseMatrix system;         // (theta*+sigma) M + dt (A_Q + kappa theta* M)
  FieldVector lump_domain;
  std::vector<Vec2> dof_pos;
  HomogenizedCoefficients coeffs;
  double dt = 0.0;
  double kappa = 0.0;
};

HomogenizedOperators build_homogenized_operators(const Rect& omega, const ProblemData& data,
                                                 const HomogenizedCoefficients& coeffs,
                                                 double h_target, double dt);

FieldVector step_homogenized(const HomogenizedOperators& ops, const ProblemData& data,
                             const FieldVector& state, double t_next, const SolveOptions& opts,
                             double blowup_threshold);

double energy_residual_homogenized(const HomogenizedOperators& ops, const ProblemData& data,
                                   const FieldVector& u_old, const FieldVector& u_new,
                                   double t_next);

struct HomogenizedRun {
  HomogenizedOperators ops;
  Trajectory trajectory;
};

HomogenizedRun run_homogenized(const ProblemData& data, const HomogenizedCoefficients& coeffs,
                               const Rect& omega, double h_target, double dt,
                               const SolveOptions& opts = {});

// CSV with columns time, l2_norm, boundary_l2_norm, h1_seminorm, energy_residual.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Mesh dump plus "s i value" lines for the snapshot.
void write_snapshot(std::ostream& os, const TriMesh& mesh, const DofMap& dofs,
                    const FieldVector& u);

}  // namespace perfhom
