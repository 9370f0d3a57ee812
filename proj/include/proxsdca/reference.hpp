#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "proxsdca/error.hpp"
#include "proxsdca/loss.hpp"
#include "proxsdca/norms.hpp"
#include "proxsdca/problem.hpp"
#include "proxsdca/regularizer.hpp"
#include "proxsdca/sparse.hpp"

// Slow, independent solvers and brute-force evaluators used to check the main solver.
// Nothing here shares step logic with solver.hpp.
namespace proxsdca::reference {

struct OracleConfig {
  std::size_t max_iters = 200000;
  double target_gap = 1e-8;
  // Subgradient mode: step c / sqrt(t); stop when the best primal moved by less than
  // stall (relative) over stall_window iterations.
  double subgradient_scale = 1.0;
  double stall = 1e-6;
  std::size_t stall_window = 2000;
  std::size_t power_iterations = 200;
};

struct ReferenceResult {
  std::vector<double> weights;
  double primal = 0.0;
  double gap = std::numeric_limits<double>::quiet_NaN();  // certified gap; NaN in subgradient mode
  std::size_t iterations = 0;
};

namespace detail {

inline std::vector<double> scores(const Dataset& data, std::span<const double> w) {
  std::vector<double> a(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) a[i] = data.example(i).columns[0].dot(w);
  return a;
}

// Largest eigenvalue of (1/n) X^T X by power iteration, padded by 1%.
inline double gram_top_eigenvalue(const Dataset& data, std::size_t iters) {
  const std::size_t d = data.dim();
  std::vector<double> x(d, 1.0 / std::sqrt(static_cast<double>(d))), y(d);
  double mu = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& row = data.example(i).columns[0];
      row.axpy_into(row.dot(x) / static_cast<double>(data.size()), y);
    }
    const double nrm = norm(std::span<const double>(y), Norm::l2);
    if (nrm == 0.0) return 0.0;
    mu = nrm;
    for (std::size_t f = 0; f < d; ++f) x[f] = y[f] / nrm;
  }
  return 1.01 * mu;
}

// (1/n) sum_i phi'(a_i) x_i
inline std::vector<double> loss_gradient(const Dataset& data, const Loss& loss, std::span<const double> a) {
  std::vector<double> g(data.dim(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double c = loss.derivative(data.label(i), a[i]);
    if (c != 0.0) data.example(i).columns[0].axpy_into(c * inv_n, g);
  }
  return g;
}

inline void require_scalar(const Loss& loss) {
  if (!loss.is_scalar()) throw UnsupportedOption("reference solvers take scalar losses");
}

}  // namespace detail

/// Batch proximal gradient on (1/n) sum phi_i(x_i^T w) + lambda (1/2||w||^2 + tau||w||_1).
///
/// Smooth losses: step 1/L and the certificate alpha_i = -phi'(x_i^T w), stopping at
/// P(w) - D(alpha) <= target_gap. Nonsmooth losses: proximal subgradient with step
/// c/sqrt(t), stopping on a stall of the best primal value.
inline ReferenceResult prox_grad_reference(const Problem& problem, const OracleConfig& cfg = {}) {
  const auto& data = problem.data();
  const auto& loss = problem.loss();
  detail::require_scalar(loss);
  const auto& reg = problem.regularizer();
  if (reg.kind() == RegularizerKind::l1qnorm)
    throw UnsupportedOption("the reference proximal map covers l2 and l1l2 regularizers");
  const double lambda = problem.lambda();
  const double tau = reg.threshold();
  const std::size_t n = data.size();
  const std::size_t d = data.dim();

  // argmin_w 1/(2 eta) ||w - y||^2 + lambda (1/2||w||^2 + tau ||w||_1)
  auto prox = [&](std::span<const double> y, double eta) {
    const double shrink = 1.0 / (1.0 + eta * lambda);
    std::vector<double> scaled(y.begin(), y.end());
    for (double& x : scaled) x *= shrink;
    return Regularizer::l1l2(eta * lambda * tau * shrink).conj_grad(scaled);
  };

  ReferenceResult out;
  out.weights.assign(d, 0.0);
  const auto gamma = loss.smoothness_gamma();
  if (gamma) {
    const double lip = detail::gram_top_eigenvalue(data, cfg.power_iterations) / *gamma;
    const double eta = lip > 0.0 ? 1.0 / lip : 1.0;
    DualMatrix alpha(1, n);
    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
      const auto a = detail::scores(data, out.weights);
      for (std::size_t i = 0; i < n; ++i) alpha.column(i)[0] = -loss.derivative(data.label(i), a[i]);
      const auto report = gap_at(problem, out.weights, alpha);
      out.primal = report.primal;
      out.gap = report.gap;
      out.iterations = it - 1;
      if (report.gap <= cfg.target_gap) return out;
      const auto g = detail::loss_gradient(data, loss, a);
      std::vector<double> y(d);
      for (std::size_t f = 0; f < d; ++f) y[f] = out.weights[f] - eta * g[f];
      out.weights = prox(y, eta);
    }
    throw NonConvergence("reference proximal gradient stopped at gap " + std::to_string(out.gap) + " after " +
                         std::to_string(cfg.max_iters) + " iterations");
  }

  std::vector<double> w(d, 0.0);
  double best = primal_objective(problem, w);
  double mark = best;
  out.weights = w;
  out.primal = best;
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const auto a = detail::scores(data, w);
    const auto g = detail::loss_gradient(data, loss, a);
    const double eta = cfg.subgradient_scale / std::sqrt(static_cast<double>(it));
    std::vector<double> y(d);
    for (std::size_t f = 0; f < d; ++f) y[f] = w[f] - eta * g[f];
    w = prox(y, eta);
    const double p = primal_objective(problem, w);
    if (p < best) {
      best = p;
      out.weights = w;
      out.primal = p;
    }
    out.iterations = it;
    if (it % cfg.stall_window == 0) {
      if (mark - best <= cfg.stall * std::max(1.0, std::abs(best))) return out;
      mark = best;
    }
  }
  throw NonConvergence("reference subgradient method did not stall within " + std::to_string(cfg.max_iters) +
                       " iterations");
}

/// ISTA on the pure l1 problem (1/n) sum phi_i(x_i^T w) + sigma ||w||_1 for smooth scalar losses.
///
/// Gap certificate: alpha = -phi'(Xw) scaled by theta = min(1, sigma / ||(1/n) sum alpha_i x_i||_inf),
/// which makes D(theta alpha) = -(1/n) sum phi_i*(-theta alpha_i) a valid lower bound.
inline ReferenceResult prox_grad_l1_reference(const Dataset& data, const Loss& loss, double sigma,
                                              const OracleConfig& cfg = {}) {
  detail::require_scalar(loss);
  const auto gamma = loss.smoothness_gamma();
  if (!gamma) throw UnsupportedOption("the l1 reference needs a smooth loss");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const double lip = detail::gram_top_eigenvalue(data, cfg.power_iterations) / *gamma;
  const double eta = lip > 0.0 ? 1.0 / lip : 1.0;
  const auto shrink = Regularizer::l1l2(eta * sigma);

  ReferenceResult out;
  out.weights.assign(d, 0.0);
  std::vector<double> alpha(n);
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const auto a = detail::scores(data, out.weights);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      loss_sum += loss.value(data.label(i), a[i]);
      alpha[i] = -loss.derivative(data.label(i), a[i]);
    }
    std::vector<double> r(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) data.example(i).columns[0].axpy_into(alpha[i] / static_cast<double>(n), r);
    const double top = norm(std::span<const double>(r), Norm::linf);
    const double theta = top > sigma ? sigma / top : 1.0;
    double conj_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) conj_sum += loss.conjugate(data.label(i), -theta * alpha[i]);
    out.primal = loss_sum / static_cast<double>(n) + sigma * norm(std::span<const double>(out.weights), Norm::l1);
    out.gap = out.primal + conj_sum / static_cast<double>(n);
    out.iterations = it - 1;
    if (out.gap <= cfg.target_gap) return out;
    // gradient of the loss term is -(1/n) sum alpha_i x_i = -r
    for (std::size_t f = 0; f < d; ++f) r[f] = out.weights[f] + eta * r[f];
    out.weights = shrink.conj_grad(r);
  }
  throw NonConvergence("l1 reference stopped at gap " + std::to_string(out.gap) + " after " +
                       std::to_string(cfg.max_iters) + " iterations");
}

// max over the grid lo, lo + step, ..., hi of z u - phi(z).
inline double brute_force_conjugate(const Loss& loss, double label, double u, double lo, double hi, double step) {
  detail::require_scalar(loss);
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("grid needs lo <= hi and a positive step");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  double best = -kInfinity;
  for (std::size_t p = 0; p <= count; ++p) {
    const double z = lo + static_cast<double>(p) * step;
    best = std::max(best, z * u - loss.value(label, z));
  }
  return best;
}

struct IncreaseBoundCheck {
  double lhs = 0.0;     // (1/n) sum_i [D(alpha + s z_i e_i) - D(alpha)]
  double rhs = 0.0;     // (s/n)(P - D) - (s/n)^2 G / (2 lambda)
  double primal = 0.0;
  double dual = 0.0;
  double g_term = 0.0;  // G = (1/n) sum_i (||X_i||^2 - gamma(1-s) lambda n / s) ||u_i - alpha_i||_D^2
};

/// Exact expectation over the uniform choice of i of the dual increase from the step
/// alpha_i += s (u_i - alpha_i), u_i = -(sub)gradient of phi_i at X_i^T w(alpha).
inline IncreaseBoundCheck expected_increase_check(const Problem& problem, const DualMatrix& alpha, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("s must lie in [0, 1]");
  const std::size_t n = problem.n();
  const std::size_t k = problem.k();
  const double nd = static_cast<double>(n);
  const double lambda_n = problem.lambda_n();
  const double gamma = problem.loss().smoothness_gamma().value_or(0.0);
  const auto image = dual_to_primal(problem, alpha);
  IncreaseBoundCheck out;
  out.primal = primal_objective(problem, image.w);
  out.dual = dual_objective(problem, alpha, image.v);

  std::vector<double> a(k), grad(k), z(k);
  double increase = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    problem.data().example(i).transpose_times(image.w, a);
    problem.loss().subgradient(problem.data().label(i), a, grad);
    const auto col = alpha.column(i);
    for (std::size_t j = 0; j < k; ++j) z[j] = -grad[j] - col[j];
    const double zn = norm(std::span<const double>(z), problem.norms().dual);
    const double xn = problem.example_norm(i);
    // s^2 ||X_i||^2 Z - s gamma (1 - s) lambda n Z, i.e. s^2 times the G summand without the 1/s pole
    weighted += (s * s * xn * xn - s * gamma * (1.0 - s) * lambda_n) * zn * zn;
    if (s == 0.0) continue;
    DualMatrix moved = alpha;
    auto mc = moved.column(i);
    for (std::size_t j = 0; j < k; ++j) mc[j] += s * z[j];
    increase += dual_objective(problem, moved) - out.dual;
  }
  out.lhs = increase / nd;
  out.g_term = s > 0.0 ? weighted / (s * s * nd) : 0.0;
  out.rhs = (s / nd) * (out.primal - out.dual) - weighted / (nd * nd * nd) / (2.0 * problem.lambda());
  return out;
}

}  // namespace proxsdca::reference
