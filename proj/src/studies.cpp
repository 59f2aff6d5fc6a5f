#include "perfhom/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>

#include <json.hpp>

namespace perfhom {

namespace {

constexpr double kPi = 3.14159265358979323846;

using ordered_json = nlohmann::ordered_json;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

template <typename T, typename Fn>
std::vector<T> map_ordered(std::size_t count, int threads, Fn&& fn) {
  std::vector<T> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<T>> futures;
  futures.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    futures.push_back(std::async(std::launch::async, [&fn, i] { return fn(i); }));
  for (std::size_t i = 0; i < count; ++i) out[i] = futures[i].get();
  return out;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  for (const auto& [k, v] : config_echo(cfg)) j[k] = v;
  return j;
}

ordered_json coeffs_json(const HomogenizedCoefficients& c) {
  ordered_json j;
  j["q"] = {{c.q.a11, c.q.a12}, {c.q.a21, c.q.a22}};
  j["theta_star"] = c.theta_star;
  j["sigma"] = c.sigma;
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw NumericalError("cannot open output file " + path.string());
  os << text;
  if (!os) throw NumericalError("failed writing output file " + path.string());
}

void write_plotdata(const std::filesystem::path& dir, const std::string& name,
                    const std::vector<std::pair<double, double>>& series) {
  std::string text;
  char buf[96];
  for (const auto& [x, y] : series) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", x, y);
    text += buf;
  }
  write_text_file(dir / (name + ".dat"), text);
}

std::filesystem::path prepare_out_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir / "plotdata", ec);
  if (ec) throw NumericalError("cannot create output directory " + dir.string());
  return dir;
}

void write_trajectory_outputs(const std::filesystem::path& dir, const Trajectory& traj) {
  {
    std::ofstream os(dir / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(os, traj);
  }
  std::vector<std::pair<double, double>> l2, bl2, h1, er;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    l2.emplace_back(traj.times[i], traj.diagnostics[i].l2);
    bl2.emplace_back(traj.times[i], traj.diagnostics[i].boundary_l2);
    h1.emplace_back(traj.times[i], traj.diagnostics[i].h1_semi);
    er.emplace_back(traj.times[i], traj.diagnostics[i].energy_residual);
  }
  write_plotdata(dir / "plotdata", "l2_norm", l2);
  write_plotdata(dir / "plotdata", "boundary_l2_norm", bl2);
  write_plotdata(dir / "plotdata", "h1_seminorm", h1);
  write_plotdata(dir / "plotdata", "energy_residual", er);
}

double analytic_sin_bump_integral(const Rect& box) {
  return (2.0 * box.width() / kPi) * (2.0 * box.height() / kPi);
}

}  // namespace

double boundary_measure_integral(const PerforatedDomain& domain, double /*h_target*/,
                                 const SpaceFn& phi) {
  if (!domain.cell.has_hole()) return 0.0;
  const std::vector<Vec2>& poly = domain.cell.hole_polygon.pts;
  const double eps = domain.epsilon;
  const double gauss = 1.0 / (2.0 * std::sqrt(3.0));
  double total = 0.0;
  for (const auto& [kx, ky] : domain.holes) {
    const Vec2 base{domain.outer.x0 + eps * kx, domain.outer.y0 + eps * ky};
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 a = base + eps * poly[i];
      const Vec2 b = base + eps * poly[(i + 1) % poly.size()];
      const double len = norm(b - a);
      const Vec2 mid = 0.5 * (a + b);
      const Vec2 off = gauss * (b - a);
      total += 0.5 * len * (phi(mid - off) + phi(mid + off));
    }
  }
  return eps * total;
}

ConvergenceResult convergence_study(const RunConfig& cfg, int threads) {
  ConvergenceResult result;
  const UnitCell cell = cell_from_config(cfg);
  result.coeffs = compute_coefficients(cell, cfg.h_cell, cfg.cg_tol_cell);
  const ProblemData data = problem_from_config(cfg);

  SolveOptions opts;
  opts.cg_tol = cfg.cg_tol;
  opts.fixedpoint_iters = cfg.fixedpoint_iters;

  // One time grid shared by the reference and every eps-run, set by the
  // finest mesh in play.
  double h_min = cfg.h_omega;
  for (double eps : cfg.epsilon_list) h_min = std::min(h_min, eps / cfg.eps_h_divisor);
  const double dt = cfg.dt_for(h_min);

  const HomogenizedRun ref = run_homogenized(data, result.coeffs, cfg.omega, cfg.h_omega, dt, opts);
  std::vector<std::vector<double>> ref_vertex_vals(ref.trajectory.snapshots.size());
  for (std::size_t i = 0; i < ref_vertex_vals.size(); ++i)
    ref_vertex_vals[i] = dof_to_vertex_values(ref.ops.mesh, ref.ops.dofs, ref.trajectory.snapshots[i]);

  result.rows = map_ordered<ConvergenceRow>(
      cfg.epsilon_list.size(), threads, [&](std::size_t idx) {
        const double eps = cfg.epsilon_list[idx];
        const double t0 = now_seconds();
        ConvergenceRow row;
        row.eps = eps;
        const PerforatedDomain dom = enumerate_holes(cfg.omega, cell, eps);
        row.n_holes = static_cast<int>(dom.holes.size());
        const DomainMeasures dm = measures(dom);
        row.measure_gap = dom.epsilon * dm.perimeter_df_eps - result.coeffs.sigma * cfg.omega.area();

        const EpsilonRun run = run_epsilon(dom, data, eps / cfg.eps_h_divisor, dt, opts);
        if (run.trajectory.times.size() != ref.trajectory.times.size())
          throw NumericalError("convergence study time grids diverged");

        FieldVector diff(run.trajectory.snapshots.front().size());
        double time_integral = 0.0;
        double final_err = 0.0;
        for (std::size_t n = 0; n < run.trajectory.times.size(); ++n) {
          const FieldVector& ue = run.trajectory.snapshots[n];
          for (std::size_t i = 0; i < diff.size(); ++i)
            diff[i] = ue[i] - eval_p1(ref.ops.mesh, ref_vertex_vals[n], run.ops.dof_pos[i]);
          const double err2 = std::max(0.0, run.ops.mass.quadratic_form(diff));
          if (n > 0) time_integral += run.ops.dt * err2;
          if (n + 1 == run.trajectory.times.size()) final_err = std::sqrt(err2);
        }
        row.err_l2_final = final_err;
        row.err_l2_time = std::sqrt(time_integral);
        row.runtime_s = now_seconds() - t0;
        return row;
      });
  return result;
}

PropertyReport properties_study(const RunConfig& cfg, int threads) {
  if (cfg.epsilon_list.empty()) throw ConfigError("properties study needs a nonempty epsilon_list");
  PropertyReport report;
  const UnitCell cell = cell_from_config(cfg);
  report.coeffs = compute_coefficients(cell, cfg.h_cell, cfg.cg_tol_cell);
  const ProblemData data = problem_from_config(cfg);

  SolveOptions opts;
  opts.cg_tol = cfg.cg_tol;
  opts.fixedpoint_iters = cfg.fixedpoint_iters;

  const Rect box = cfg.omega;
  auto sin_bump = [box](Vec2 x) {
    return std::sin(kPi * (x.x - box.x0) / box.width()) *
           std::sin(kPi * (x.y - box.y0) / box.height());
  };

  // Trace inequality ratios, eps by eps.
  report.trace = map_ordered<TraceRow>(cfg.epsilon_list.size(), threads, [&](std::size_t idx) {
    const double eps = cfg.epsilon_list[idx];
    TraceRow row;
    row.eps = eps;
    const PerforatedDomain dom = enumerate_holes(box, cell, eps);
    const TriMesh mesh = triangulate_perforated(dom, eps / cfg.eps_h_divisor);
    const DofMap dofs = build_dofmap(mesh, BoundaryTag::outer);
    const SparseMatrix m = assemble_mass(mesh, dofs);
    const SparseMatrix a = assemble_stiffness(mesh, dofs);
    const SparseMatrix b1 = assemble_boundary_mass(mesh, dofs, BoundaryTag::hole, 1.0);
    const std::vector<Vec2> pos = dof_positions(mesh, dofs);

    auto ratio_of = [&](const FieldVector& v) {
      const double num = eps * b1.quadratic_form(v);
      const double den = m.quadratic_form(v) + eps * eps * a.quadratic_form(v);
      return den > 0.0 ? num / den : 0.0;
    };

    FieldVector v(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) v[i] = sin_bump(pos[i]);
    row.max_ratio = ratio_of(v);

    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int s = 0; s < 20; ++s) {
      for (double& x : v) x = uni(rng);
      row.max_ratio = std::max(row.max_ratio, ratio_of(v));
    }
    return row;
  });
  {
    double lo = report.trace.front().max_ratio, hi = lo;
    for (const TraceRow& r : report.trace) {
      lo = std::min(lo, r.max_ratio);
      hi = std::max(hi, r.max_ratio);
    }
    report.trace_spread = lo > 0.0 ? hi / lo : 0.0;
    report.trace_ok = report.trace_spread > 0.0 && report.trace_spread < 4.0;
  }

  // Uniform a priori bounds on a shared time grid.
  double h_min = 1.0;
  for (double eps : cfg.epsilon_list) h_min = std::min(h_min, eps / cfg.eps_h_divisor);
  const double dt = cfg.dt_for(h_min);
  report.bounds = map_ordered<BoundsRow>(cfg.epsilon_list.size(), threads, [&](std::size_t idx) {
    const double eps = cfg.epsilon_list[idx];
    BoundsRow row;
    row.eps = eps;
    const PerforatedDomain dom = enumerate_holes(box, cell, eps);
    const EpsilonRun run = run_epsilon(dom, data, eps / cfg.eps_h_divisor, dt, opts);
    const Trajectory& traj = run.trajectory;
    auto h1_norm2 = [&](const FieldVector& u) {
      return run.ops.mass.quadratic_form(u) + run.ops.stiffness.quadratic_form(u);
    };
    double l2h1 = 0.0, sup = 0.0, dtl2h1 = 0.0;
    FieldVector d(traj.snapshots.front().size());
    for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
      const double nn = h1_norm2(traj.snapshots[n]);
      sup = std::max(sup, nn);
      if (n > 0) {
        l2h1 += run.ops.dt * nn;
        for (std::size_t i = 0; i < d.size(); ++i)
          d[i] = (traj.snapshots[n][i] - traj.snapshots[n - 1][i]) / run.ops.dt;
        dtl2h1 += run.ops.dt * h1_norm2(d);
      }
    }
    row.l2h1 = std::sqrt(l2h1);
    row.sup_h1 = std::sqrt(sup);
    row.dtl2h1 = std::sqrt(dtl2h1);
    return row;
  });
  {
    auto spread = [&](auto member) {
      double lo = report.bounds.front().*member, hi = lo;
      for (const BoundsRow& r : report.bounds) {
        lo = std::min(lo, r.*member);
        hi = std::max(hi, r.*member);
      }
      return lo > 0.0 ? hi / lo : 1.0;
    };
    report.bounds_worst_spread = std::max(
        {spread(&BoundsRow::l2h1), spread(&BoundsRow::sup_h1), spread(&BoundsRow::dtl2h1)});
    report.bounds_ok = report.bounds_worst_spread <= 2.0;
  }

  // Vanninathan measure convergence for the sin bump and for phi = 1.
  report.limit_sin = report.coeffs.sigma * analytic_sin_bump_integral(box);
  const double limit_one = report.coeffs.sigma * box.area();
  for (double eps : cfg.epsilon_list) {
    const PerforatedDomain dom = enumerate_holes(box, cell, eps);
    MeasureRow rs;
    rs.eps = eps;
    rs.surface_integral = boundary_measure_integral(dom, eps / cfg.eps_h_divisor, sin_bump);
    rs.gap = std::abs(rs.surface_integral - report.limit_sin);
    report.measure_sin.push_back(rs);
    MeasureRow r1;
    r1.eps = eps;
    r1.surface_integral =
        boundary_measure_integral(dom, eps / cfg.eps_h_divisor, [](Vec2) { return 1.0; });
    r1.gap = std::abs(r1.surface_integral - limit_one);
    report.measure_one.push_back(r1);
  }
  {
    bool ok = true;
    if (report.measure_sin.size() >= 2)
      ok = report.measure_sin.back().gap < report.measure_sin.front().gap;
    for (const MeasureRow& r : report.measure_one)
      ok = ok && r.gap <= 1e-12 * std::max(1.0, limit_one);
    report.measure_ok = ok;
  }
  return report;
}

std::string run_cell_study(const RunConfig& cfg, const std::string& out_dir) {
  const auto dir = prepare_out_dir(out_dir);
  const UnitCell cell = cell_from_config(cfg);
  const HomogenizedCoefficients coeffs = compute_coefficients(cell, cfg.h_cell, cfg.cg_tol_cell);

  ordered_json j;
  j["study"] = study_kind_name(StudyKind::cell);
  j["config"] = config_json(cfg);
  j["coefficients"] = coeffs_json(coeffs);
  const std::string text = j.dump(2) + "\n";
  write_text_file(dir / "results.json", text);
  write_text_file(dir / "coefficients.json", coefficients_to_json(coeffs) + "\n");

  char buf[256];
  std::snprintf(buf, sizeof buf, "theta_star,sigma,q11,q12,q21,q22\n%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                coeffs.theta_star, coeffs.sigma, coeffs.q.a11, coeffs.q.a12, coeffs.q.a21,
                coeffs.q.a22);
  write_text_file(dir / "table.csv", buf);
  return text;
}

std::string run_epsilon_study(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.epsilon_list.empty()) throw ConfigError("epsilon_run study needs a nonempty epsilon_list");
  const auto dir = prepare_out_dir(out_dir);
  const UnitCell cell = cell_from_config(cfg);
  const ProblemData data = problem_from_config(cfg);
  const double eps = cfg.epsilon_list.front();
  const double h_target = eps / cfg.eps_h_divisor;
  SolveOptions opts;
  opts.cg_tol = cfg.cg_tol;
  opts.fixedpoint_iters = cfg.fixedpoint_iters;

  const PerforatedDomain dom = enumerate_holes(cfg.omega, cell, eps);
  const EpsilonRun run = run_epsilon(dom, data, h_target, cfg.dt_for(h_target), opts);
  write_trajectory_outputs(dir, run.trajectory);
  {
    std::ofstream os(dir / "snapshot_final.txt", std::ios::binary);
    write_snapshot(os, run.ops.mesh, run.ops.dofs, run.trajectory.snapshots.back());
  }

  ordered_json j;
  j["study"] = study_kind_name(StudyKind::epsilon_run);
  j["config"] = config_json(cfg);
  j["epsilon"] = eps;
  j["n_holes"] = static_cast<int>(dom.holes.size());
  j["n_dofs"] = run.ops.dofs.n_dofs;
  j["steps"] = static_cast<int>(run.trajectory.times.size()) - 1;
  j["final_l2"] = run.trajectory.diagnostics.back().l2;
  j["final_h1_seminorm"] = run.trajectory.diagnostics.back().h1_semi;
  const std::string text = j.dump(2) + "\n";
  write_text_file(dir / "results.json", text);
  {
    std::ostringstream os;
    write_trajectory_csv(os, run.trajectory);
    write_text_file(dir / "table.csv", os.str());
  }
  return text;
}

std::string run_homogenized_study(const RunConfig& cfg, const std::string& out_dir) {
  const auto dir = prepare_out_dir(out_dir);
  const UnitCell cell = cell_from_config(cfg);
  const HomogenizedCoefficients coeffs = compute_coefficients(cell, cfg.h_cell, cfg.cg_tol_cell);
  const ProblemData data = problem_from_config(cfg);
  SolveOptions opts;
  opts.cg_tol = cfg.cg_tol;
  opts.fixedpoint_iters = cfg.fixedpoint_iters;

  const HomogenizedRun run =
      run_homogenized(data, coeffs, cfg.omega, cfg.h_omega, cfg.dt_for(cfg.h_omega), opts);
  write_trajectory_outputs(dir, run.trajectory);
  {
    std::ofstream os(dir / "snapshot_final.txt", std::ios::binary);
    write_snapshot(os, run.ops.mesh, run.ops.dofs, run.trajectory.snapshots.back());
  }

  ordered_json j;
  j["study"] = study_kind_name(StudyKind::homogenized_run);
  j["config"] = config_json(cfg);
  j["coefficients"] = coeffs_json(coeffs);
  j["n_dofs"] = run.ops.dofs.n_dofs;
  j["steps"] = static_cast<int>(run.trajectory.times.size()) - 1;
  j["final_l2"] = run.trajectory.diagnostics.back().l2;
  const std::string text = j.dump(2) + "\n";
  write_text_file(dir / "results.json", text);
  {
    std::ostringstream os;
    write_trajectory_csv(os, run.trajectory);
    write_text_file(dir / "table.csv", os.str());
  }
  return text;
}

std::string run_convergence_study(const RunConfig& cfg, const std::string& out_dir, int threads) {
  const auto dir = prepare_out_dir(out_dir);
  const ConvergenceResult res = convergence_study(cfg, threads);

  ordered_json j;
  j["study"] = study_kind_name(StudyKind::convergence);
  j["config"] = config_json(cfg);
  j["coefficients"] = coeffs_json(res.coeffs);
  ordered_json rows = ordered_json::array();
  for (const ConvergenceRow& r : res.rows) {
    ordered_json row;
    row["eps"] = r.eps;
    row["n_holes"] = r.n_holes;
    row["err_l2_final"] = r.err_l2_final;
    row["err_l2_time_integrated"] = r.err_l2_time;
    row["measure_gap"] = r.measure_gap;
    rows.push_back(row);
  }
  j["table"] = rows;
  const std::string text = j.dump(2) + "\n";
  write_text_file(dir / "results.json", text);

  std::string csv = "eps,n_holes,err_l2_final,err_l2_time_integrated,measure_gap,runtime_s\n";
  char buf[256];
  for (const ConvergenceRow& r : res.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.6f\n", r.eps, r.n_holes,
                  r.err_l2_final, r.err_l2_time, r.measure_gap, r.runtime_s);
    csv += buf;
  }
  write_text_file(dir / "table.csv", csv);

  std::vector<std::pair<double, double>> err_series;
  for (const ConvergenceRow& r : res.rows) err_series.emplace_back(r.eps, r.err_l2_final);
  write_plotdata(dir / "plotdata", "error_vs_eps", err_series);
  return text;
}

std::string run_properties_study(const RunConfig& cfg, const std::string& out_dir, int threads) {
  const auto dir = prepare_out_dir(out_dir);
  const PropertyReport rep = properties_study(cfg, threads);

  ordered_json j;
  j["study"] = study_kind_name(StudyKind::properties);
  j["config"] = config_json(cfg);
  j["coefficients"] = coeffs_json(rep.coeffs);
  ordered_json trace = ordered_json::array();
  for (const TraceRow& r : rep.trace) trace.push_back({{"eps", r.eps}, {"max_ratio", r.max_ratio}});
  j["trace"] = trace;
  j["trace_spread"] = rep.trace_spread;
  j["trace_ok"] = rep.trace_ok;
  ordered_json bounds = ordered_json::array();
  for (const BoundsRow& r : rep.bounds)
    bounds.push_back(
        {{"eps", r.eps}, {"l2h1", r.l2h1}, {"sup_h1", r.sup_h1}, {"dt_l2h1", r.dtl2h1}});
  j["bounds"] = bounds;
  j["bounds_worst_spread"] = rep.bounds_worst_spread;
  j["bounds_ok"] = rep.bounds_ok;
  ordered_json msin = ordered_json::array(), mone = ordered_json::array();
  for (const MeasureRow& r : rep.measure_sin)
    msin.push_back({{"eps", r.eps}, {"surface_integral", r.surface_integral}, {"gap", r.gap}});
  for (const MeasureRow& r : rep.measure_one)
    mone.push_back({{"eps", r.eps}, {"surface_integral", r.surface_integral}, {"gap", r.gap}});
  j["measure_sin"] = msin;
  j["measure_one"] = mone;
  j["measure_limit_sin"] = rep.limit_sin;
  j["measure_ok"] = rep.measure_ok;
  j["all_ok"] = rep.all_ok();
  const std::string text = j.dump(2) + "\n";
  write_text_file(dir / "results.json", text);

  std::string csv = "check,eps,value\n";
  char buf[160];
  for (const TraceRow& r : rep.trace) {
    std::snprintf(buf, sizeof buf, "trace_max_ratio,%.17g,%.17g\n", r.eps, r.max_ratio);
    csv += buf;
  }
  for (const BoundsRow& r : rep.bounds) {
    std::snprintf(buf, sizeof buf, "bounds_l2h1,%.17g,%.17g\n", r.eps, r.l2h1);
    csv += buf;
    std::snprintf(buf, sizeof buf, "bounds_sup_h1,%.17g,%.17g\n", r.eps, r.sup_h1);
    csv += buf;
    std::snprintf(buf, sizeof buf, "bounds_dt_l2h1,%.17g,%.17g\n", r.eps, r.dtl2h1);
    csv += buf;
  }
  for (const MeasureRow& r : rep.measure_sin) {
    std::snprintf(buf, sizeof buf, "measure_sin_gap,%.17g,%.17g\n", r.eps, r.gap);
    csv += buf;
  }
  for (const MeasureRow& r : rep.measure_one) {
    std::snprintf(buf, sizeof buf, "measure_one_gap,%.17g,%.17g\n", r.eps, r.gap);
    csv += buf;
  }
  write_text_file(dir / "table.csv", csv);

  std::vector<std::pair<double, double>> trace_series, gap_series;
  for (const TraceRow& r : rep.trace) trace_series.emplace_back(r.eps, r.max_ratio);
  for (const MeasureRow& r : rep.measure_sin) gap_series.emplace_back(r.eps, r.gap);
  write_plotdata(dir / "plotdata", "trace_ratio", trace_series);
  write_plotdata(dir / "plotdata", "measure_gap", gap_series);
  return text;
}

int run_study(const RunConfig& cfg, const std::string& out_dir, int threads) {
  switch (cfg.kind) {
    case StudyKind::cell:
      run_cell_study(cfg, out_dir);
      return 0;
    case StudyKind::epsilon_run:
      run_epsilon_study(cfg, out_dir);
      return 0;
    case StudyKind::homogenized_run:
      run_homogenized_study(cfg, out_dir);
      return 0;
    case StudyKind::convergence:
      run_convergence_study(cfg, out_dir, threads);
      return 0;
    case StudyKind::properties: {
      const std::string text = run_properties_study(cfg, out_dir, threads);
      const auto j = nlohmann::json::parse(text);
      return j.at("all_ok").get<bool>() ? 0 : 3;
    }
  }
  return 0;
}

}  // namespace perfhom
