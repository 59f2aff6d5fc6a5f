#pragma once

#include <array>
#include <string>

#include "perfhom/fem.hpp"

namespace perfhom {

// Discrete corrector eta_j on the periodic cell mesh, normalized to zero
// mean over Y*.
struct CorrectorField {
  int j = 0;  // coordinate index, 1 or 2
  FieldVector values;
  double mean = 0.0;
};

struct HomogenizedCoefficients {
  Mat2 q;
  double theta_star = 1.0;  // |Y*|/|Y|
  double sigma = 0.0;       // |dF|/|Y|

  std::array<double, 2> q_eigenvalues() const;
};

// Workspace shared by the two cell problems.
struct CellSystem {
  PeriodicMesh pmesh;
  DofMap dofs;
  SparseMatrix stiffness;
  FieldVector lump;  // lumped areas per dof, sums to |Y*|
};

CellSystem build_cell_system(const UnitCell& cell, double h_target);

/// Solves the periodic corrector problem
///   int_{Y*} grad(eta_j) . grad(v) = int_{dF} n_j v   for all periodic v,
/// with n the outward normal of Y* on dF, then shifts to zero mean. Verifies
/// the compatibility integral of n_j over dF before solving.
CorrectorField solve_cell_problem(const CellSystem& sys, int j, double cg_tol = 1e-13);

/// q_ij = theta* delta_ij - int_{Y*} d(eta_j)/dy_i, by exact per-triangle
/// integration of the piecewise-constant corrector gradients. Validates the
/// coefficient invariants.
HomogenizedCoefficients homogenized_matrix(const CellSystem& sys, const CorrectorField& eta1,
                                           const CorrectorField& eta2, const UnitCell& cell);

/// Energy form int_{Y*} |grad(y_j - eta_j)|^2, the variational route to q_jj.
double corrector_energy(const CellSystem& sys, const CorrectorField& eta);

/// Convenience: full pipeline cell -> coefficients.
HomogenizedCoefficients compute_coefficients(const UnitCell& cell, double h_target,
                                             double cg_tol = 1e-13);

/// JSON record {"q": [[..,..],[..,..]], "theta_star": .., "sigma": ..}.
std::string coefficients_to_json(const HomogenizedCoefficients& c);
HomogenizedCoefficients coefficients_from_json(const std::string& text);

}  // namespace perfhom
