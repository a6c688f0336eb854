#include "doakit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "CLI11.hpp"
#include "doakit/config.hpp"
#include "doakit/control.hpp"
#include "doakit/doa.hpp"
#include "doakit/errors.hpp"
#include "doakit/lyap_opt.hpp"
#include "doakit/verify.hpp"
#include "json.hpp"

namespace doakit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(row);
  }
  return rows;
}

json box_json(const IvBox& b) {
  json lo = json::array();
  json hi = json::array();
  for (const auto& d : b.dims()) {
    lo.push_back(d.lo());
    hi.push_back(d.hi());
  }
  return {{"lo", lo}, {"hi", hi}};
}

json paving_summary(const Paving& p) {
  json j{{"boxes", p.size()}, {"measure", measure(p)}};
  if (p.dim() == 1) {
    json parts = json::array();
    for (const auto& c : components_1d(p)) parts.push_back({c.lo(), c.hi()});
    j["components"] = parts;
  }
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

struct Context {
  RunConfig cfg;
  fs::path out;
  std::ostream& log;
};

PavingHeader header_for(const Context& ctx, const Paving& p) {
  return PavingHeader{p.dim(), p.n_state(), p.m_ctrl(), ctx.cfg.eps, ctx.cfg.alpha};
}

// Emits every pipeline artifact and returns the estimate.
DoaEstimate run_doa(const Context& ctx, const NegDefSpec& spec, bool full) {
  const DoaEstimate est = doa_pipeline(spec);
  write_paving((ctx.out / "ndef.jsonl").string(), est.ndef, header_for(ctx, est.ndef),
               &est.ndef_boundary);
  if (!full) return est;
  write_paving((ctx.out / "niset.jsonl").string(), est.ni_set, header_for(ctx, est.ni_set));
  write_paving((ctx.out / "proj.jsonl").string(), est.proj, header_for(ctx, est.proj));
  write_paving((ctx.out / "doa.jsonl").string(), est.doa_region, header_for(ctx, est.doa_region));

  json report{{"lyapunov", spec.lyapunov.to_string()},
              {"epsilon", spec.eps},
              {"alpha", spec.alpha},
              {"degenerate", est.degenerate},
              {"iterations", est.iterations},
              {"refine_measures", est.refine_measures},
              {"ndef", paving_summary(est.ndef)},
              {"ndef_boundary_boxes", est.ndef_boundary.size()},
              {"niset", paving_summary(est.ni_set)},
              {"proj", paving_summary(est.proj)},
              {"x0", est.x0 ? box_json(*est.x0) : json(nullptr)},
              {"doa", paving_summary(est.doa_region)},
              {"volume", est.volume}};
  write_json(ctx.out / "doa_report.json", report);
  write_json(ctx.out / "timings.json", {{"negdef_s", est.timings.negdef_s},
                                        {"refine_s", est.timings.refine_s},
                                        {"total_s", est.timings.total_s}});
  ctx.log << "doa: volume " << est.volume << ", " << est.ni_set.size() << " boxes, "
          << est.iterations << " refinement passes" << (est.degenerate ? " (degenerate)" : "")
          << '\n';
  return est;
}

// Loads the estimate from earlier artifacts when they match the config,
// otherwise recomputes and emits them.
DoaEstimate load_or_run_doa(const Context& ctx, const NegDefSpec& spec) {
  const fs::path niset = ctx.out / "niset.jsonl";
  const fs::path doa = ctx.out / "doa.jsonl";
  const fs::path report = ctx.out / "doa_report.json";
  if (fs::exists(niset) && fs::exists(doa) && fs::exists(report)) {
    try {
      std::ifstream rs(report);
      const json r = json::parse(rs);
      const auto ni = read_paving(niset.string());
      if (r.at("lyapunov").get<std::string>() == spec.lyapunov.to_string() &&
          ni.header.epsilon == spec.eps && ni.header.alpha == spec.alpha &&
          ni.header.n_state == spec.plant.n_state() && ni.header.m_ctrl == spec.plant.m_ctrl()) {
        DoaEstimate est;
        est.ni_set = ni.inner;
        est.doa_region = read_paving(doa.string()).inner;
        est.degenerate = r.at("degenerate").get<bool>();
        est.iterations = r.at("iterations").get<int>();
        est.volume = r.at("volume").get<double>();
        if (!est.ni_set.empty()) est.proj = project(est.ni_set);
        if (!r.at("x0").is_null()) {
          const auto lo = r["x0"]["lo"].get<std::vector<double>>();
          const auto hi = r["x0"]["hi"].get<std::vector<double>>();
          std::vector<Interval> dims;
          for (std::size_t i = 0; i < lo.size(); ++i) dims.emplace_back(lo[i], hi[i]);
          est.x0 = IvBox(std::move(dims));
        }
        ctx.log << "doa: reusing artifacts in " << ctx.out.string() << '\n';
        return est;
      }
    } catch (const std::exception&) {
      // stale or unreadable artifacts are regenerated below
    }
  }
  return run_doa(ctx, spec, true);
}

void write_table(const Context& ctx, const ControllerTable& table, const Eigen::MatrixXd& k,
                 const std::optional<IvBox>& x0) {
  std::ofstream os(ctx.out / "table.jsonl");
  if (!os) throw ConfigError("cannot write table.jsonl");
  os << json{{"n_state", table.n_state()},
             {"m_ctrl", table.m_ctrl()},
             {"cells", table.cells().size()},
             {"K", matrix_json(k)},
             {"x0", x0 ? box_json(*x0) : json(nullptr)}}
            .dump()
     << '\n';
  for (const auto& cell : table.cells()) {
    json j = box_json(cell.state_box);
    j["u"] = cell.u;
    j["margin"] = cell.margin;
    os << j.dump() << '\n';
  }
}

void write_trajectories(const fs::path& path, const RunSummary& runs, int n, int m) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "run,step";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= m; ++i) os << ",u" << i;
  os << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < runs.trajectories.size(); ++r) {
    const Trajectory& t = runs.trajectories[r];
    for (std::size_t s = 0; s < t.states.size(); ++s) {
      os << r << ',' << s;
      for (double v : t.states[s]) os << ',' << v;
      for (int i = 0; i < m; ++i) {
        os << ',';
        if (s < t.controls.size()) os << t.controls[s][i];
      }
      os << '\n';
    }
  }
}

json summary_json(const RunSummary& s) {
  return {{"runs", s.runs},
          {"converged", s.converged},
          {"domain_failures", s.domain_failures},
          {"lyapunov_violations", s.lyapunov_violations},
          {"gap_visits", s.gap_visits},
          {"failures", s.failures}};
}

int cmd_check(const Context& ctx) {
  const PlantModel plant = ctx.cfg.plant();
  const Expr lyap = ctx.cfg.lyapunov_expr();
  const std::vector<double> zx(plant.n_state(), 0.0);
  const std::vector<double> zu(plant.m_ctrl(), 0.0);
  const Linearization lin = jacobian_at(plant, zx, zu);
  json report{{"f(0,0)", plant.step(zx, zu)},
              {"A", matrix_json(lin.A)},
              {"B", matrix_json(lin.B)},
              {"open_loop_spectral_radius", spectral_radius(lin.A)},
              {"lyapunov", lyap.to_string()},
              {"L(0)", eval_scalar(lyap, zx, {})}};
  const Eigen::MatrixXd k = ctx.cfg.gain(plant);
  report["K"] = matrix_json(k);
  report["closed_loop_spectral_radius"] = spectral_radius(lin.A + lin.B * k);
  ctx.cfg.spec();
  ctx.log << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_controller(const Context& ctx, bool simulate_too) {
  const NegDefSpec spec = ctx.cfg.spec();
  const DoaEstimate est = load_or_run_doa(ctx, spec);
  if (est.degenerate || est.ni_set.empty()) {
    throw InvarianceViolation("the DOA estimate is degenerate; no controller to build");
  }
  const Eigen::MatrixXd k = ctx.cfg.gain(spec.plant);
  const ControllerTable table(est.ni_set);
  write_table(ctx, table, k, est.x0);
  ctx.log << "controller: " << table.cells().size() << " cells, K = " << k(0, 0) << '\n';
  if (!simulate_too) return kExitOk;

  const ClosedLoopReport rep =
      verify_closed_loop(spec.plant, spec.lyapunov, est, spec.cons.state_box(), k, ctx.cfg.sim);
  const int n = spec.plant.n_state();
  const int m = spec.plant.m_ctrl();
  write_trajectories(ctx.out / "traj_table.csv", rep.table, n, m);
  write_trajectories(ctx.out / "traj_sampled.csv", rep.sampled, n, m);
  json gaps = json::array();
  for (const auto& g : region_gaps(spec.cons.state_box(), est.doa_region)) {
    if (g.volume() > 0.0) gaps.push_back(box_json(g));
  }
  json verify{{"table", summary_json(rep.table)},
              {"sampled", summary_json(rep.sampled)},
              {"gaps", gaps},
              {"gap_avoided", rep.table.gap_visits == 0 && rep.sampled.gap_visits == 0},
              {"K", matrix_json(k)},
              {"ok", rep.ok()}};
  if (rep.x0) {
    verify["x0"] = {{"spectral_radius", rep.x0->spectral_radius},
                    {"runs", rep.x0->runs},
                    {"converged", rep.x0->converged}};
  }
  write_json(ctx.out / "verify.json", verify);
  ctx.log << "simulate: table " << rep.table.converged << "/" << rep.table.runs << ", sampled "
          << rep.sampled.converged << "/" << rep.sampled.runs << " converged\n";
  return rep.ok() ? kExitOk : kExitVerification;
}

int cmd_optimize(const Context& ctx) {
  if (ctx.cfg.lyapunov.mode != "sos") throw ConfigError("optimize needs lyapunov.mode \"sos\"");
  if (!ctx.cfg.pso) throw ConfigError("optimize needs a pso section");
  NegDefSpec tmpl{ctx.cfg.plant(), parse("x1^2", ctx.cfg.n, 0), ctx.cfg.cons(), ctx.cfg.alpha,
                  ctx.cfg.eps};
  tmpl.validate();
  const int n = ctx.cfg.lyapunov.sos.n;
  const int d = ctx.cfg.lyapunov.sos.d;
  const PsoResult res = pso_optimize(*ctx.cfg.pso, n, d, tmpl);

  std::ofstream log(ctx.out / "optimize_log.csv");
  if (!log) throw ConfigError("cannot write optimize_log.csv");
  const int r = monomial_count(n, d);
  log << "iteration,best";
  for (int i = 0; i < r * r; ++i) log << ",p" << i / r + 1 << i % r + 1;
  log << '\n' << std::setprecision(17);
  for (const auto& h : res.history) {
    log << h.iteration << ',' << h.best;
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) log << ',' << h.p(i, j);
    }
    log << '\n';
  }

  json report{{"best_objective", res.best},
              {"P", matrix_json(res.best_p)},
              {"evaluations", res.evaluations},
              {"swarm", ctx.cfg.pso->swarm},
              {"iterations", ctx.cfg.pso->iterations},
              {"seed", ctx.cfg.pso->seed}};
  std::vector<double> history;
  for (const auto& h : res.history) history.push_back(h.best);
  report["history"] = history;
  const SosLyapunov best{n, d, res.best_p};
  if (best.full_rank()) {
    tmpl.lyapunov = sos_to_expr(best);
    report["lyapunov"] = tmpl.lyapunov.to_string();
    run_doa(ctx, tmpl, true);
  }
  write_json(ctx.out / "optimize_report.json", report);
  ctx.log << "optimize: best proj measure " << res.best << " after " << res.evaluations
          << " evaluations\n";
  return kExitOk;
}

int cmd_baseline(const Context& ctx) {
  const NegDefSpec spec = ctx.cfg.spec();
  const IvBox cons_state = spec.cons.state_box();
  Paving region;
  if (ctx.cfg.baseline_region) {
    region = normalize(*ctx.cfg.baseline_region, spec.plant.n_state(), 0);
  } else {
    region = load_or_run_doa(ctx, spec).doa_region;
  }
  if (region.empty()) throw InvarianceViolation("baseline region is empty");
  const LevelSetBaseline base = levelset_baseline(spec.lyapunov, region, cons_state, spec.eps);
  write_json(ctx.out / "baseline_report.json", {{"lyapunov", spec.lyapunov.to_string()},
                                                {"c", base.c},
                                                {"region", paving_summary(region)},
                                                {"set", paving_summary(base.set)}});
  ctx.log << "baseline: c = " << base.c << ", set measure " << measure(base.set) << '\n';
  return kExitOk;
}

int dispatch(const std::string& command, const Context& ctx) {
  if (command == "check") return cmd_check(ctx);
  if (command == "nset") {
    run_doa(ctx, ctx.cfg.spec(), false);
    return kExitOk;
  }
  if (command == "niset" || command == "doa") {
    run_doa(ctx, ctx.cfg.spec(), true);
    return kExitOk;
  }
  if (command == "controller") return cmd_controller(ctx, false);
  if (command == "simulate") return cmd_controller(ctx, true);
  if (command == "optimize") return cmd_optimize(ctx);
  return cmd_baseline(ctx);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop domain-of-attraction estimation with interval analysis", "doa-kit"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "Pipeline stage")
      ->required()
      ->check(CLI::IsMember(
          {"check", "nset", "niset", "doa", "controller", "simulate", "optimize", "baseline"}));
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--eps", eps, "SIVIA precision (overrides eps)");
  app.add_option("--seed", seed, "Seed for simulation and PSO (overrides both)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "doa-kit: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (eps) cfg.eps = *eps;
    if (seed) {
      cfg.sim.seed = *seed;
      if (cfg.pso) cfg.pso->seed = *seed;
    }
    fs::create_directories(cfg.output_dir);
    const Context ctx{cfg, fs::path(cfg.output_dir), out};
    return dispatch(command, ctx);
  } catch (const ConfigError& e) {
    err << "doa-kit: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StabilizabilityError& e) {
    err << "doa-kit: verification failed: " << e.what() << '\n';
    return kExitVerification;
  } catch (const InvarianceViolation& e) {
    err << "doa-kit: verification failed: " << e.what() << '\n';
    return kExitVerification;
  } catch (const Error& e) {
    err << "doa-kit: numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "doa-kit: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace doakit
