// Command-line front end: cell problems, eps-runs, homogenized runs,
// convergence studies and property checks, driven by a declarative config.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "perfhom/kernels.hpp"
#include "perfhom/studies.hpp"

namespace {

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::string simd;
};

int run(perfhom::StudyKind kind, const CliArgs& args) {
  using namespace perfhom;
  RunConfig cfg = args.config_path.empty() ? RunConfig{} : parse_config_file(args.config_path);
  validate_config(cfg);
  cfg.kind = kind;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (!args.simd.empty()) {
    if (args.simd == "scalar") kernels::set_active_level(kernels::SimdLevel::scalar);
    else if (args.simd == "avx2") kernels::set_active_level(kernels::SimdLevel::avx2);
    else throw ConfigError("unknown --simd level: " + args.simd);
  }
  if (args.threads < 1) throw ConfigError("--threads must be at least 1");
  return run_study(cfg, cfg.out_dir, args.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"periodic homogenization of reaction-diffusion problems in perforated media"};
  app.require_subcommand(1);
  app.fallthrough();

  CliArgs args;
  app.add_option("--config", args.config_path, "path to the run configuration file");
  app.add_option("--out", args.out_dir, "output directory (overrides [output] dir)");
  app.add_option("--threads", args.threads, "number of concurrent eps-runs");
  app.add_option("--simd", args.simd, "force kernel variant: scalar or avx2");

  auto* cell = app.add_subcommand("cell", "solve the periodic cell problem and emit Q, theta*, sigma");
  auto* run_eps = app.add_subcommand("run-eps", "time-step the eps-problem on the perforated domain");
  auto* run_hom = app.add_subcommand("run-hom", "time-step the homogenized limit problem");
  auto* converge = app.add_subcommand("converge", "eps -> 0 convergence study against the limit");
  auto* props = app.add_subcommand("props", "trace, uniform-bound and boundary-measure checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  perfhom::StudyKind kind = perfhom::StudyKind::convergence;
  if (cell->parsed()) kind = perfhom::StudyKind::cell;
  else if (run_eps->parsed()) kind = perfhom::StudyKind::epsilon_run;
  else if (run_hom->parsed()) kind = perfhom::StudyKind::homogenized_run;
  else if (converge->parsed()) kind = perfhom::StudyKind::convergence;
  else if (props->parsed()) kind = perfhom::StudyKind::properties;

  try {
    return run(kind, args);
  } catch (const perfhom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const perfhom::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
