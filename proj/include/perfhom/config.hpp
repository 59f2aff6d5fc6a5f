#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "perfhom/parabolic.hpp"

namespace perfhom {

enum class StudyKind { cell, epsilon_run, homogenized_run, convergence, properties };

const char* study_kind_name(StudyKind k);

// Declarative run configuration; sections [geometry], [discretization],
// [problem], [study], [output]. Unknown keys are errors.
struct RunConfig {
  // [geometry]
  Rect omega{0.0, 0.0, 1.0, 1.0};
  HoleSpec hole = HoleSpec::disc({0.5, 0.5}, 0.25, 64);

  // [discretization]
  double h_cell = 1.0 / 64;
  double h_omega = 1.0 / 64;
  double eps_h_divisor = 8.0;  // h_target(eps) = eps / divisor
  double dt = 0.0;             // explicit time step; 0 selects the rule below
  double dt_rule_c = 0.5;      // dt = c * h of the run
  double cg_tol = 1e-10;
  double cg_tol_cell = 1e-13;
  int fixedpoint_iters = 0;
  std::vector<double> epsilon_list{0.25, 0.125, 0.0625};

  // [problem]
  double kappa = 1.0;
  std::string f_kind = "power";
  double p = 4.0;
  std::string g_kind = "linear";
  std::string h_preset = "smooth";
  std::string rho_preset = "smooth";
  std::string initial_preset = "sinpi";
  double T_final = 0.25;

  // [study]
  StudyKind kind = StudyKind::convergence;

  // [output]
  std::string out_dir = "out";

  double dt_for(double h_target) const { return dt > 0.0 ? dt : dt_rule_c * h_target; }
};

RunConfig parse_config(std::istream& is);
RunConfig parse_config_file(const std::string& path);

/// Cross-field checks: epsilon_list strictly decreasing and tiling, catalog
/// names resolvable, exponent range. Throws ConfigError.
void validate_config(const RunConfig& cfg);

UnitCell cell_from_config(const RunConfig& cfg);
Nonlinearity nonlinearity_from_config(const RunConfig& cfg);
ProblemData problem_from_config(const RunConfig& cfg);

/// Normalized key-value echo of the configuration for results.json.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg);

}  // namespace perfhom
