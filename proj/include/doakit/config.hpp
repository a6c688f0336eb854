#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doakit/doa.hpp"
#include "doakit/lyap_opt.hpp"
#include "doakit/verify.hpp"

namespace doakit {

struct LyapunovConfig {
  std::string mode = "explicit";  ///< "explicit" or "sos"
  std::string expression;
  SosLyapunov sos;
};

struct ControllerConfig {
  std::string mode = "lqr";  ///< "lqr" or "gain"
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
  Eigen::MatrixXd k;
};

/// One JSON document describing a full run.
struct RunConfig {
  int n = 1;
  int m = 1;
  std::vector<std::string> dynamics;
  std::vector<double> cons_lo;
  std::vector<double> cons_hi;
  double alpha = 1e-15;
  double eps = 0.01;
  LyapunovConfig lyapunov;
  ControllerConfig controller;
  std::optional<PsoConfig> pso;
  SimSettings sim;
  /// Optional region for the level-set baseline; defaults to the DOA estimate.
  std::optional<std::vector<IvBox>> baseline_region;
  std::string output_dir = "out";

  PlantModel plant() const;
  IvBox cons() const;
  Expr lyapunov_expr() const;
  NegDefSpec spec() const;
  /// Configured gain (validated) or the LQR gain.
  Eigen::MatrixXd gain(const PlantModel& plant) const;
};

/// Throws ConfigError (or ParseError for expressions) on the first problem.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace doakit
