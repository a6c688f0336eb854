#include "doakit/lyap_opt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doakit/control.hpp"
#include "doakit/errors.hpp"

namespace doakit {

namespace {

// All exponent vectors of total degree `deg`, lexicographically descending.
void exponents_of_degree(int n, int deg, int var, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
  if (var == n - 1) {
    cur[var] = deg;
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = deg; e >= 0; --e) {
    cur[var] = e;
    exponents_of_degree(n, deg - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

std::vector<std::vector<int>> monomial_exponents(int n, int d) {
  if (n < 1 || d < 1) throw ConfigError("monomial vector needs n >= 1 and d >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  for (int deg = 1; deg <= d; ++deg) exponents_of_degree(n, deg, 0, cur, out);
  return out;
}

int monomial_count(int n, int d) {
  // C(n + d, d) - 1, built incrementally to stay exact
  long long c = 1;
  for (int i = 1; i <= d; ++i) c = c * (n + i) / i;
  return static_cast<int>(c - 1);
}

std::vector<double> monomial_vector(std::span<const double> x, int n, int d) {
  if (static_cast<int>(x.size()) != n) throw ConfigError("point has the wrong dimension");
  std::vector<double> s;
  for (const auto& a : monomial_exponents(n, d)) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= std::pow(x[i], a[i]);
    s.push_back(v);
  }
  return s;
}

bool SosLyapunov::full_rank() const {
  return p.rows() == p.cols() && p.rows() > 0 && std::abs(p.determinant()) >= 1e-6;
}

Expr sos_to_expr(const SosLyapunov& lyap) {
  const int r = monomial_count(lyap.n, lyap.d);
  if (lyap.p.rows() != r || lyap.p.cols() != r) {
    throw ConfigError("P must be " + std::to_string(r) + " x " + std::to_string(r));
  }
  if (!lyap.full_rank()) throw ConfigError("P fails the full-rank guard |det P| >= 1e-6");

  const auto mons = monomial_exponents(lyap.n, lyap.d);
  const Eigen::MatrixXd m = lyap.p.transpose() * lyap.p;
  // graded order of the product exponents: by degree, then descending lex
  auto graded = [](const std::vector<int>& a, const std::vector<int>& b) {
    int da = 0, db = 0;
    for (int v : a) da += v;
    for (int v : b) db += v;
    if (da != db) return da < db;
    return a > b;
  };
  std::map<std::vector<int>, double, decltype(graded)> coeff(graded);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      std::vector<int> e(lyap.n);
      for (int k = 0; k < lyap.n; ++k) e[k] = mons[i][k] + mons[j][k];
      coeff[e] += m(i, j);
    }
  }

  Expr sum;
  bool first = true;
  for (const auto& [e, c] : coeff) {
    if (c == 0.0) continue;
    Expr term = Expr::constant(c);
    for (int k = 0; k < lyap.n; ++k) {
      if (e[k] == 0) continue;
      const Expr v = Expr::state(k + 1, lyap.n);
      term = term * (e[k] == 1 ? v : pow_int(v, static_cast<unsigned>(e[k])));
    }
    sum = first ? term : sum + term;
    first = false;
  }
  return sum;
}

double sos_objective(const SosLyapunov& lyap, const NegDefSpec& tmpl) {
  if (!lyap.full_rank()) return -1.0;
  try {
    NegDefSpec spec = tmpl;
    spec.lyapunov = sos_to_expr(lyap);
    const DoaEstimate est = doa_pipeline(spec);
    return measure(est.proj);
  } catch (const Error&) {
    return -1.0;
  }
}

PsoResult pso_optimize(const PsoConfig& cfg, int n, int d, const NegDefSpec& tmpl) {
  if (cfg.swarm < 1 || cfg.iterations < 0 || !(cfg.lower < cfg.upper)) {
    throw ConfigError("invalid PSO settings");
  }
  const int r = monomial_count(n, d);
  const int dim = r * r;
  const double span = cfg.upper - cfg.lower;
  std::mt19937_64 rng(cfg.seed);

  using Vec = Eigen::VectorXd;
  auto to_matrix = [&](const Vec& v) {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
               v.data(), r, r)
        .eval();
  };

  PsoResult result;
  auto evaluate = [&](const Vec& v) {
    ++result.evaluations;
    return sos_objective(SosLyapunov{n, d, to_matrix(v)}, tmpl);
  };

  std::vector<Vec> pos(cfg.swarm, Vec(dim));
  std::vector<Vec> vel(cfg.swarm, Vec::Zero(dim));
  for (auto& x : pos) {
    for (int k = 0; k < dim; ++k) x[k] = cfg.lower + uniform01(rng) * span;
  }
  std::vector<Vec> pbest = pos;
  std::vector<double> pbest_val(cfg.swarm);
  Vec gbest = pos[0];
  double gbest_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.swarm; ++i) {
    pbest_val[i] = evaluate(pos[i]);
    if (pbest_val[i] > gbest_val) {
      gbest_val = pbest_val[i];
      gbest = pos[i];
    }
  }
  result.history.push_back({0, gbest_val, to_matrix(gbest)});

  for (int it = 1; it <= cfg.iterations; ++it) {
    for (int i = 0; i < cfg.swarm; ++i) {
      for (int k = 0; k < dim; ++k) {
        const double r1 = uniform01(rng);
        const double r2 = uniform01(rng);
        double v = cfg.inertia * vel[i][k] + cfg.cognitive * r1 * (pbest[i][k] - pos[i][k]) +
                   cfg.social * r2 * (gbest[k] - pos[i][k]);
        vel[i][k] = std::clamp(v, -span, span);
        pos[i][k] = std::clamp(pos[i][k] + vel[i][k], cfg.lower, cfg.upper);
      }
    }
    for (int i = 0; i < cfg.swarm; ++i) {
      const double val = evaluate(pos[i]);
      if (val > pbest_val[i]) {
        pbest_val[i] = val;
        pbest[i] = pos[i];
      }
      if (val > gbest_val) {
        gbest_val = val;
        gbest = pos[i];
      }
    }
    result.history.push_back({it, gbest_val, to_matrix(gbest)});
  }
  result.best = gbest_val;
  result.best_p = to_matrix(gbest);
  return result;
}

}  // namespace doakit
