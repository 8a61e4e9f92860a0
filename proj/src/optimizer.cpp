// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "qderk/errors.hpp"
#include "qderk/stability.hpp"
#include "qderk/trees.hpp"

namespace qderk {

namespace {

std::size_t u(int i) { return static_cast<std::size_t>(i); }

}  // namespace

std::vector<double> encode_parameters(const StageLayout& layout,
                                      const FreeParameters& fp) {
  std::vector<double> x;
  for (const ExtReal& c : fp.q_nodes) x.push_back(c.to_double());
  for (const DenseVector& split : fp.cluster_splits)
    for (std::size_t k = 1; k < split.size(); ++k)
      x.push_back(split[k].to_double());
  for (auto ij : free_q_indices(layout)) {
    auto it = fp.free_A_Q.find(ij);
    x.push_back(it == fp.free_A_Q.end() ? 0.0 : it->second.to_double());
  }
  for (auto ij : free_d_indices(layout)) {
    auto it = fp.free_A_D.find(ij);
    x.push_back(it == fp.free_A_D.end() ? 0.0 : it->second.to_double());
  }
  return x;
}

FreeParameters decode_parameters(const StageLayout& layout,
                                 const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != degrees_of_freedom(layout))
    throw ValidationError("parameter vector length mismatch");
  mpfr_prec_t prec = layout.precision_bits;
  FreeParameters fp;
  std::size_t pos = 0;
  fp.q_nodes = DenseVector(u(layout.l));
  for (int k = 0; k < layout.l; ++k) fp.q_nodes[u(k)] = ExtReal(x[pos++], prec);
  for (int i = 1; i <= layout.N - 2; ++i) {
    const auto& cluster = layout.clusters[u(i - 1)];
    DenseVector split(cluster.size());
    ExtReal rest(0, prec);
    for (std::size_t k = 1; k < cluster.size(); ++k) {
      split[k] = ExtReal(x[pos++], prec);
      rest += split[k];
    }
    split[0] = layout.cluster_weight(i).round_to(prec) - rest;
    fp.cluster_splits.push_back(split);
  }
  for (auto ij : free_q_indices(layout))
    fp.free_A_Q[ij] = ExtReal(x[pos++], prec);
  for (auto ij : free_d_indices(layout))
    fp.free_A_D[ij] = ExtReal(x[pos++], prec);
  return fp;
}

FreeParameters extract_free_parameters(const StageLayout& layout,
                                       const ButcherTableau& T) {
  FreeParameters fp;
  fp.q_nodes = DenseVector(u(layout.l));
  for (int stage = 2; stage <= layout.l + 1; ++stage)
    fp.q_nodes[u(stage - 2)] = T.c[u(stage - 1)];
  for (int i = 1; i <= layout.N - 2; ++i) {
    const auto& cluster = layout.clusters[u(i - 1)];
    DenseVector split(cluster.size());
    ExtReal rest(0);
    for (std::size_t k = 1; k < cluster.size(); ++k) {
      split[k] = T.b[u(cluster[k] - 1)];
      rest += split[k];
    }
    // The ghost weight is the dependent one: project it onto the cluster-sum
    // constraint so rounded source tableaux stay feasible.
    split[0] = layout.cluster_weight(i) - rest;
    fp.cluster_splits.push_back(split);
  }
  for (auto [i, j] : free_q_indices(layout))
    fp.free_A_Q[{i, j}] = T.A(u(i - 1), u(j - 1));
  for (auto [i, j] : free_d_indices(layout))
    fp.free_A_D[{i, j}] = T.A(u(i - 1), u(j - 1));
  return fp;
}

std::vector<double> parameter_scales(const StageLayout& layout) {
  std::vector<double> s;
  for (int k = 0; k < layout.l; ++k) s.push_back(0.1);
  for (int i = 1; i <= layout.N - 2; ++i) {
    double w = layout.cluster_weight(i).to_double();
    for (std::size_t k = 1; k < layout.clusters[u(i - 1)].size(); ++k)
      s.push_back(0.1 * w);
  }
  std::size_t a = free_q_indices(layout).size() + free_d_indices(layout).size();
  for (std::size_t k = 0; k < a; ++k) s.push_back(0.2);
  return s;
}

namespace {

// Distance-to-feasibility heuristic: pairwise node gaps within each Q-group
// and distance of every free node from the pinned endpoints.
double node_shortfall(const StageLayout& layout, const FreeParameters& fp) {
  const double delta = 0.01;
  double shortfall = 0;
  auto deficit = [&](double gap) { shortfall += std::max(0.0, delta - gap); };
  for (auto [a, b] : layout.q_groups) {
    for (int s1 = a; s1 <= b; ++s1) {
      double c1 = fp.q_nodes[u(s1 - 2)].to_double();
      deficit(std::abs(c1));
      deficit(std::abs(c1 - 1.0));
      for (int s2 = s1 + 1; s2 <= b; ++s2)
        deficit(std::abs(c1 - fp.q_nodes[u(s2 - 2)].to_double()));
    }
  }
  return 100.0 * shortfall;
}

}  // namespace

double fitness(const std::vector<double>& x, int p, const FitnessConfig& cfg) {
  StageLayout layout = plan_layout(p, cfg.eval_precision);
  FreeParameters fp = decode_parameters(layout, x);
  ButcherTableau T;
  try {
    T = construct(p, fp, cfg.eval_precision);
  } catch (const ValidationError&) {
    return 1e6 + node_shortfall(layout, fp);
  } catch (const InfeasibleError&) {
    return 1e6 + node_shortfall(layout, fp);
  }
  double J = 0;
  if (cfg.w_err > 0) {
    double tau = principal_error_norm(T, p).to_double();
    double j_err = tau > 0 ? std::max(-1e12, -1.0 / tau) : -1e12;
    J += cfg.w_err * j_err;
  }
  if (cfg.w_stab > 0) {
    StabilityPolynomial P = stability_polynomial(T);
    ExtReal tol = pow_int(ExtReal(0.5), 30);
    double L = real_stability_interval(P, tol).to_double();
    double j_stab = -cfg.w_interval * L;
    if (cfg.w_area > 0 || cfg.w_convex > 0) {
      StabilityReport rep = analyze_stability(
          P, ExtReal(cfg.y_max_factor * L), cfg.proxy_lines, tol);
      j_stab += -cfg.w_area * rep.area_proxy.to_double() +
                cfg.w_convex * rep.convexity_penalty.to_double();
    }
    J += cfg.w_stab * j_stab;
  }
  return J;
}

namespace {

// Deterministic standard normal from the raw 64-bit stream (Box-Muller on
// 53-bit uniforms), independent of library distribution internals.
class Gaussian {
 public:
  explicit Gaussian(unsigned long seed) : rng_(seed) {}

  double operator()() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1p-53;  // (0,1]
    double u2 = static_cast<double>(rng_() >> 11) * 0x1p-53;          // [0,1)
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(a);
    have_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 rng_;
  bool have_ = false;
  double cached_ = 0;
};

}  // namespace

CMAResult cma_es_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, double sigma0, int generations,
    unsigned long seed, int lambda) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw ValidationError("empty parameter vector");
  if (generations < 1) throw ValidationError("budget must be >= 1 generation");
  if (lambda == 0) lambda = 4 + static_cast<int>(std::floor(3.0 * std::log(n)));
  if (lambda < 2) throw ValidationError("population must be >= 2");

  const int mu = lambda / 2;
  Eigen::VectorXd w(mu);
  for (int i = 0; i < mu; ++i) w[i] = std::log(mu + 0.5) - std::log(i + 1.0);
  w /= w.sum();
  const double mueff = 1.0 / w.squaredNorm();
  const double csig = (mueff + 2.0) / (n + mueff + 5.0);
  const double dsig =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (n + 1.0)) - 1.0) +
      csig;
  const double cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
  const double c1 = 2.0 / ((n + 1.3) * (n + 1.3) + mueff);
  const double cmu = std::min(
      1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) * (n + 2.0) + mueff));
  const double chiN =
      std::sqrt(static_cast<double>(n)) *
      (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd ps = Eigen::VectorXd::Zero(n), pc = Eigen::VectorXd::Zero(n);
  double sigma = sigma0;
  Gaussian gauss(seed);

  CMAResult result;
  result.best = x0;
  result.best_fitness = f(x0);  // the initial mean seeds best-so-far

  std::vector<Eigen::VectorXd> z(u(lambda)), y(u(lambda));
  std::vector<double> fx(u(lambda));
  std::vector<int> idx(u(lambda));
  for (int g = 1; g <= generations; ++g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    Eigen::VectorXd D = eig.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
    const Eigen::MatrixXd& B = eig.eigenvectors();

    for (int k = 0; k < lambda; ++k) {
      z[u(k)] = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) {
        return gauss();
      });
      y[u(k)] = B * D.asDiagonal() * z[u(k)];
      Eigen::VectorXd xk = m + sigma * y[u(k)];
      fx[u(k)] = f(std::vector<double>(xk.data(), xk.data() + n));
    }
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return fx[u(a)] < fx[u(b)]; });
    if (fx[u(idx[0])] < result.best_fitness) {
      result.best_fitness = fx[u(idx[0])];
      Eigen::VectorXd xb = m + sigma * y[u(idx[0])];
      result.best.assign(xb.data(), xb.data() + n);
    }

    Eigen::VectorXd yw = Eigen::VectorXd::Zero(n), zw = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < mu; ++i) {
      yw += w[i] * y[u(idx[u(i)])];
      zw += w[i] * z[u(idx[u(i)])];
    }
    m += sigma * yw;
    ps = (1.0 - csig) * ps + std::sqrt(csig * (2.0 - csig) * mueff) * (B * zw);
    double ps_norm = ps.norm();
    bool hsig = ps_norm / std::sqrt(1.0 - std::pow(1.0 - csig, 2.0 * g)) / chiN <
                1.4 + 2.0 / (n + 1.0);
    pc = (1.0 - cc) * pc +
         (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * yw;
    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < mu; ++i)
      rank_mu += w[i] * y[u(idx[u(i)])] * y[u(idx[u(i)])].transpose();
    C = (1.0 - c1 - cmu) * C +
        c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * C) +
        cmu * rank_mu;
    C = 0.5 * (C + C.transpose().eval());
    sigma *= std::exp((csig / dsig) * (ps_norm / chiN - 1.0));

    result.history.push_back(result.best_fitness);
  }
  return result;
}

std::pair<ButcherTableau, OptimizeReport> optimize_method(int p,
                                                          const FitnessConfig& cfg,
                                                          int generations,
                                                          unsigned long seed) {
  if (p < 6 || p % 2 != 0)
    throw ValidationError("optimization requires even p >= 6");
  StageLayout layout = plan_layout(p, cfg.eval_precision);
  std::vector<double> x_def =
      encode_parameters(layout, default_free_parameters(layout));
  std::vector<double> scale = parameter_scales(layout);
  auto to_x = [&](const std::vector<double>& v) {
    std::vector<double> x = x_def;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += scale[k] * v[k];
    return x;
  };
  auto f = [&](const std::vector<double>& v) { return fitness(to_x(v), p, cfg); };
  CMAResult res = cma_es_minimize(f, std::vector<double>(x_def.size(), 0.0),
                                  0.3, generations, seed);

  std::vector<double> x_best = to_x(res.best);
  mpfr_prec_t prec = ExtReal::default_precision();
  ButcherTableau T;
  bool verified = false;
  OrderReport order;
  for (int attempt = 0; attempt < 3 && !verified; ++attempt, prec *= 2) {
    StageLayout full = plan_layout(p, prec);
    T = construct(p, decode_parameters(full, x_best), prec);
    order = verify_order(T, p);
    verified = order.order_verified == p;
  }
  if (!verified)
    throw VerificationError("optimized method failed order re-verification");

  OptimizeReport rep;
  rep.config = cfg;
  rep.history = res.history;
  rep.best_fitness = res.best_fitness;
  rep.verified_order = order.order_verified;
  rep.error_norm = principal_error_norm(T, p).to_double();
  StabilityPolynomial P = stability_polynomial(T);
  ExtReal tol = pow_int(ExtReal(0.5), 40);
  ExtReal L = real_stability_interval(P, tol);
  StabilityReport stab =
      analyze_stability(P, ExtReal(cfg.y_max_factor) * L, cfg.proxy_lines, tol);
  rep.real_interval = L.to_double();
  rep.area_proxy = stab.area_proxy.to_double();
  rep.convexity_penalty = stab.convexity_penalty.to_double();
  return {T, rep};
}

std::string serialize_report(const OptimizeReport& rep) {
  nlohmann::json j;
  j["config"] = {{"w_err", rep.config.w_err},
                 {"w_stab", rep.config.w_stab},
                 {"w_area", rep.config.w_area},
                 {"w_interval", rep.config.w_interval},
                 {"w_convex", rep.config.w_convex},
                 {"y_max_factor", rep.config.y_max_factor},
                 {"proxy_lines", rep.config.proxy_lines},
                 {"eval_precision", static_cast<long>(rep.config.eval_precision)}};
  j["best_fitness_per_generation"] = rep.history;
  j["best_fitness"] = rep.best_fitness;
  j["error_norm"] = rep.error_norm;
  j["real_interval"] = rep.real_interval;
  j["area_proxy"] = rep.area_proxy;
  j["convexity_penalty"] = rep.convexity_penalty;
  j["verified_order"] = rep.verified_order;
  return j.dump(2);
}

}  // namespace qderk
