#pragma once

#include <string>

#include "perfhom/config.hpp"

namespace perfhom {

struct ConvergenceRow {
  double eps = 0.0;
  int n_holes = 0;
  double err_l2_final = 0.0;      // |u_eps - u|_{L2(Omega_eps)} at t = T
  double err_l2_time = 0.0;       // L2(0,T; L2(Omega_eps)) of the same difference
  double measure_gap = 0.0;       // eps |dF_eps| - sigma |Omega|
  double runtime_s = 0.0;
};

struct ConvergenceResult {
  HomogenizedCoefficients coeffs;
  std::vector<ConvergenceRow> rows;
};

/// Runs the cell problem, one fine homogenized reference run, and one
/// eps-run per entry of epsilon_list; errors are measured by restriction to
/// Omega_eps, interpolating the reference barycentrically.
ConvergenceResult convergence_study(const RunConfig& cfg, int threads = 1);

struct TraceRow {
  double eps = 0.0;
  double max_ratio = 0.0;  // eps |v|^2_{dF_eps} / (|v|^2 + eps^2 |grad v|^2)
};

struct BoundsRow {
  double eps = 0.0;
  double l2h1 = 0.0;       // ||u||_{L2(0,T;H1)}
  double sup_h1 = 0.0;     // sup_t ||u(t)||_{H1}
  double dtl2h1 = 0.0;     // ||u'||_{L2(0,T;H1)} by difference quotients
};

struct MeasureRow {
  double eps = 0.0;
  double surface_integral = 0.0;  // eps int_{dF_eps} phi
  double gap = 0.0;               // |surface_integral - sigma int_Omega phi|
};

struct PropertyReport {
  HomogenizedCoefficients coeffs;
  std::vector<TraceRow> trace;
  double trace_spread = 0.0;  // max over eps / min over eps of max_ratio
  std::vector<BoundsRow> bounds;
  double bounds_worst_spread = 0.0;  // worst max/min across the three norms
  std::vector<MeasureRow> measure_sin;
  std::vector<MeasureRow> measure_one;
  double limit_sin = 0.0;  // sigma int_Omega sin-bump
  bool trace_ok = false;
  bool bounds_ok = false;
  bool measure_ok = false;
  bool all_ok() const { return trace_ok && bounds_ok && measure_ok; }
};

PropertyReport properties_study(const RunConfig& cfg, int threads = 1);

/// eps-scaled surface integral of an analytic test function by per-edge
/// two-point Gauss quadrature.
double boundary_measure_integral(const PerforatedDomain& domain, double h_target,
                                 const SpaceFn& phi);

// Study drivers used by the CLI. Each writes results.json, table.csv and
// plotdata/*.dat under out_dir and returns the JSON document text. Outputs
// contain no timestamps; the runtime column in table.csv is the only field
// expected to vary between identical re-runs.
std::string run_cell_study(const RunConfig& cfg, const std::string& out_dir);
std::string run_epsilon_study(const RunConfig& cfg, const std::string& out_dir);
std::string run_homogenized_study(const RunConfig& cfg, const std::string& out_dir);
std::string run_convergence_study(const RunConfig& cfg, const std::string& out_dir, int threads);
std::string run_properties_study(const RunConfig& cfg, const std::string& out_dir, int threads);

/// Dispatch on cfg.kind. Returns the process exit code (0 ok, 3 when a
/// properties study fails its assertions).
int run_study(const RunConfig& cfg, const std::string& out_dir, int threads);

}  // namespace perfhom
