#include "doakit/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "doakit/control.hpp"
#include "doakit/errors.hpp"
#include "json.hpp"

namespace doakit {

using nlohmann::json;

namespace {

Eigen::MatrixXd read_matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw ConfigError(std::string(what) + " rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

std::vector<double> read_vector(const json& j, const char* what, std::size_t size) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != size) {
    throw ConfigError(std::string(what) + " must have " + std::to_string(size) + " entries");
  }
  return v;
}

RunConfig from_json(const json& doc) {
  RunConfig cfg;
  const json& plant = doc.at("plant");
  cfg.n = plant.at("n").get<int>();
  cfg.m = plant.at("m").get<int>();
  if (cfg.n < 1 || cfg.m < 0) throw ConfigError("plant needs n >= 1 and m >= 0");
  cfg.dynamics = plant.at("dynamics").get<std::vector<std::string>>();
  if (static_cast<int>(cfg.dynamics.size()) != cfg.n) {
    throw ConfigError("plant.dynamics must list n expressions");
  }

  const std::size_t dim = static_cast<std::size_t>(cfg.n + cfg.m);
  cfg.cons_lo = read_vector(doc.at("cons").at("lo"), "cons.lo", dim);
  cfg.cons_hi = read_vector(doc.at("cons").at("hi"), "cons.hi", dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!std::isfinite(cfg.cons_lo[i]) || !std::isfinite(cfg.cons_hi[i]) ||
        !(cfg.cons_lo[i] < cfg.cons_hi[i])) {
      throw ConfigError("cons must be finite with lo < hi");
    }
  }
  cfg.alpha = doc.value("alpha", cfg.alpha);
  cfg.eps = doc.value("eps", cfg.eps);

  const json& lyap = doc.at("lyapunov");
  cfg.lyapunov.mode = lyap.at("mode").get<std::string>();
  if (cfg.lyapunov.mode == "explicit") {
    cfg.lyapunov.expression = lyap.at("expression").get<std::string>();
  } else if (cfg.lyapunov.mode == "sos") {
    cfg.lyapunov.sos.n = lyap.value("n", cfg.n);
    cfg.lyapunov.sos.d = lyap.at("d").get<int>();
    if (cfg.lyapunov.sos.n != cfg.n || cfg.lyapunov.sos.d < 1) {
      throw ConfigError("lyapunov.n must equal plant.n and d must be >= 1");
    }
    const int r = monomial_count(cfg.n, cfg.lyapunov.sos.d);
    if (lyap.contains("P")) {
      cfg.lyapunov.sos.p = read_matrix(lyap.at("P"), "lyapunov.P");
    } else {
      cfg.lyapunov.sos.p = Eigen::MatrixXd::Identity(r, r);
    }
  } else {
    throw ConfigError("lyapunov.mode must be \"explicit\" or \"sos\"");
  }

  if (doc.contains("controller")) {
    const json& ctl = doc.at("controller");
    cfg.controller.mode = ctl.at("mode").get<std::string>();
    if (cfg.controller.mode == "gain") {
      cfg.controller.k = read_matrix(ctl.at("K"), "controller.K");
    } else if (cfg.controller.mode != "lqr") {
      throw ConfigError("controller.mode must be \"lqr\" or \"gain\"");
    }
    if (ctl.contains("Q")) cfg.controller.q = read_matrix(ctl.at("Q"), "controller.Q");
    if (ctl.contains("R")) cfg.controller.r = read_matrix(ctl.at("R"), "controller.R");
  }
  if (cfg.controller.q.size() == 0) cfg.controller.q = Eigen::MatrixXd::Identity(cfg.n, cfg.n);
  if (cfg.controller.r.size() == 0) cfg.controller.r = Eigen::MatrixXd::Identity(cfg.m, cfg.m);

  if (doc.contains("pso")) {
    const json& p = doc.at("pso");
    PsoConfig pso;
    pso.swarm = p.value("swarm", pso.swarm);
    pso.iterations = p.value("iterations", pso.iterations);
    pso.inertia = p.value("inertia", pso.inertia);
    pso.cognitive = p.value("cognitive", pso.cognitive);
    pso.social = p.value("social", pso.social);
    if (p.contains("bounds")) {
      const auto b = read_vector(p.at("bounds"), "pso.bounds", 2);
      pso.lower = b[0];
      pso.upper = b[1];
    }
    pso.seed = p.value("seed", pso.seed);
    if (pso.swarm < 1 || pso.iterations < 0 || !(pso.lower < pso.upper)) {
      throw ConfigError("pso needs swarm >= 1, iterations >= 0 and lower < upper");
    }
    cfg.pso = pso;
  }

  if (doc.contains("sim")) {
    const json& s = doc.at("sim");
    cfg.sim.trajectories = s.value("trajectories", cfg.sim.trajectories);
    cfg.sim.max_steps = s.value("max_steps", cfg.sim.max_steps);
    cfg.sim.conv_tol = s.value("conv_tol", cfg.sim.conv_tol);
    cfg.sim.seed = s.value("seed", cfg.sim.seed);
    if (cfg.sim.trajectories < 0 || cfg.sim.max_steps < 0 || !(cfg.sim.conv_tol > 0.0)) {
      throw ConfigError("sim needs trajectories >= 0, max_steps >= 0 and conv_tol > 0");
    }
  }

  if (doc.contains("baseline") && doc.at("baseline").contains("region")) {
    std::vector<IvBox> boxes;
    for (const json& b : doc.at("baseline").at("region")) {
      const auto lo = read_vector(b.at("lo"), "baseline.region.lo", cfg.n);
      const auto hi = read_vector(b.at("hi"), "baseline.region.hi", cfg.n);
      std::vector<Interval> dims;
      for (int i = 0; i < cfg.n; ++i) dims.emplace_back(lo[i], hi[i]);
      boxes.emplace_back(std::move(dims));
    }
    if (boxes.empty()) throw ConfigError("baseline.region must list at least one box");
    cfg.baseline_region = std::move(boxes);
  }

  cfg.output_dir = doc.value("output_dir", cfg.output_dir);
  return cfg;
}

}  // namespace

PlantModel RunConfig::plant() const { return PlantModel::parse(n, m, dynamics); }

IvBox RunConfig::cons() const {
  std::vector<Interval> dims;
  for (std::size_t i = 0; i < cons_lo.size(); ++i) dims.emplace_back(cons_lo[i], cons_hi[i]);
  return IvBox(std::move(dims), n, m);
}

Expr RunConfig::lyapunov_expr() const {
  if (lyapunov.mode == "explicit") return parse(lyapunov.expression, n, 0);
  return sos_to_expr(lyapunov.sos);
}

NegDefSpec RunConfig::spec() const {
  NegDefSpec s{plant(), lyapunov_expr(), cons(), alpha, eps};
  s.validate();
  return s;
}

Eigen::MatrixXd RunConfig::gain(const PlantModel& p) const {
  if (controller.mode == "gain") {
    check_gain(p, controller.k);
    return controller.k;
  }
  return linear_gain(p, controller.q, controller.r);
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    RunConfig cfg = from_json(doc);
    if (!(cfg.eps > 0.0)) throw ConfigError("eps must be positive");
    if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace doakit
