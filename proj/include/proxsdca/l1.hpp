#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proxsdca/error.hpp"
#include "proxsdca/loss.hpp"
#include "proxsdca/norms.hpp"
#include "proxsdca/problem.hpp"
#include "proxsdca/regularizer.hpp"
#include "proxsdca/schedule.hpp"
#include "proxsdca/solver.hpp"

namespace proxsdca {

enum class L1Variant { l2_instances, linf_instances };

struct L1Config {
  double sigma = 0.1;
  double eps = 0.01;
  std::optional<double> bound;  // B; 1/sigma when absent
  L1Variant variant = L1Variant::l2_instances;
  UpdateOption option = UpdateOption::III;
  std::uint64_t seed = 1;
  std::size_t gap_check_every = 0;
  std::optional<double> radius_override;

  double effective_bound() const { return bound.value_or(1.0 / sigma); }

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be positive");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be positive");
    if (!(effective_bound() > 0.0) || !std::isfinite(effective_bound())) throw ConfigError("B must be positive");
  }
};

// lambda = eps / B^2
inline double l1_l2_lambda(double eps, double bound) { return eps / (bound * bound); }

// lambda = eps / (3 ln(d) B^2)
inline double l1_linf_lambda(double eps, double bound, std::size_t dim) {
  if (dim < 3) throw DimensionError("the l-infinity variant needs d >= 3");
  return eps / (3.0 * std::log(static_cast<double>(dim)) * bound * bound);
}

// (1/n) sum_i phi_i(x_i^T w) + sigma ||w||_1
inline double l1_objective(const Dataset& data, const Loss& loss, double sigma, std::span<const double> w) {
  if (!loss.is_scalar()) throw UnsupportedOption("l1 problems take scalar losses");
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    acc += loss.value(data.label(i), data.example(i).columns[0].dot(w));
  return acc / static_cast<double>(data.size()) + sigma * norm(w, Norm::l1);
}

struct L1Result {
  std::vector<double> weights;
  double lambda = 0.0;
  double threshold = 0.0;  // sigma / lambda
  double bound = 0.0;
  std::size_t iteration_cap = 0;
  double internal_target = 0.0;  // eps / 2
  RunResult run;
  std::vector<std::string> warnings;

  bool reached_target() const noexcept { return run.reached_target; }
};

namespace detail {

inline std::size_t l1_iteration_cap(const Problem& problem, double target) {
  const auto& loss = problem.loss();
  if (auto gamma = loss.smoothness_gamma())
    return schedule_smooth(problem.n(), problem.radius(), problem.lambda(), *gamma, target);
  return schedule_lipschitz(problem.n(), problem.radius(), *loss.lipschitz(), problem.lambda(), target).iterations;
}

inline L1Result solve_l1(std::shared_ptr<const Dataset> data, const Loss& loss, const L1Config& config,
                         bool linf) {
  config.validate();
  if (!loss.is_scalar()) throw UnsupportedOption("l1 problems take scalar losses");
  const double bound = config.effective_bound();
  const std::size_t dim = data->dim();
  L1Result out;
  out.bound = bound;
  out.lambda = linf ? l1_linf_lambda(config.eps, bound, dim) : l1_l2_lambda(config.eps, bound);
  out.threshold = config.sigma / out.lambda;
  auto reg = linf ? Regularizer::l1qnorm(dim, out.threshold) : Regularizer::l1l2(out.threshold);
  Problem problem(data, loss, reg, out.lambda, config.radius_override);

  out.internal_target = config.eps / 2.0;
  out.iteration_cap = l1_iteration_cap(problem, out.internal_target);
  SolverConfig sc;
  sc.option = config.option;
  sc.iterations = out.iteration_cap;
  sc.output = OutputMode::final;
  sc.seed = config.seed;
  sc.gap_check_every = config.gap_check_every;
  sc.target_gap = out.internal_target;
  sc.radius_override = config.radius_override;
  out.run = run(problem, sc);
  out.weights = out.run.weights;

  out.warnings = problem.warnings();
  const double size = norm(std::span<const double>(out.weights), linf ? Norm::l1 : Norm::l2);
  if (size > bound)
    out.warnings.push_back(std::string(linf ? "||w||_1" : "||w||_2") + " = " + std::to_string(size) +
                           " exceeds B = " + std::to_string(bound) + "; the eps guarantee may not hold");
  if (!out.run.reached_target)
    out.warnings.push_back("iteration cap reached before the internal gap target");
  return out;
}

}  // namespace detail

/// Solves min (1/n) sum phi_i(x_i^T w) + sigma ||w||_1 for l2-bounded instances by running
/// Prox-SDCA on the composite problem with lambda = eps/B^2 and g = 1/2||w||^2 + (sigma/lambda)||w||_1
/// to duality gap eps/2 (capped by the rate schedule).
inline L1Result solve_l1_l2(std::shared_ptr<const Dataset> data, const Loss& loss, const L1Config& config) {
  return detail::solve_l1(std::move(data), loss, config, false);
}

/// Same for l-infinity-bounded instances: lambda = eps/(3 ln(d) B^2) with the q-norm regularizer.
inline L1Result solve_l1_linf(std::shared_ptr<const Dataset> data, const Loss& loss, const L1Config& config) {
  return detail::solve_l1(std::move(data), loss, config, true);
}

inline L1Result solve_l1(std::shared_ptr<const Dataset> data, const Loss& loss, const L1Config& config) {
  return detail::solve_l1(std::move(data), loss, config, config.variant == L1Variant::linf_instances);
}

struct L1Certificate {
  double objective = 0.0;            // P_l1(w_hat)
  double reference_objective = 0.0;  // P_l1(w_ref)
  double difference = 0.0;
  double eps = 0.0;
  bool pass = false;
};

inline L1Certificate certify_l1(const Dataset& data, const Loss& loss, double sigma, std::span<const double> w_hat,
                                std::span<const double> w_ref, double eps) {
  L1Certificate c;
  c.objective = l1_objective(data, loss, sigma, w_hat);
  c.reference_objective = l1_objective(data, loss, sigma, w_ref);
  c.difference = c.objective - c.reference_objective;
  c.eps = eps;
  c.pass = c.difference <= eps;
  return c;
}

}  // namespace proxsdca
