#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proxsdca/error.hpp"
#include "proxsdca/loss.hpp"
#include "proxsdca/problem.hpp"
#include "proxsdca/random.hpp"
#include "proxsdca/schedule.hpp"
#include "proxsdca/solver.hpp"
#include "proxsdca/sparse.hpp"

namespace proxsdca {

// Result of loss-augmented decoding at example i.
struct Decoding {
  std::size_t label = 0;  // j = argmax_j delta(j, y) - w.psi(x, y) + w.psi(x, j)
  double loss = 0.0;      // P_i at the maximizer
  SparseVec psi_true;     // psi(x_i, y_i)
  SparseVec psi_pred;     // psi(x_i, j)
  double cost = 0.0;      // delta(j, y_i)
};

template <class O>
concept DecodingOracle = requires(const O& oracle, std::span<const double> w, std::size_t i) {
  { oracle.decode(w, i) } -> std::same_as<Decoding>;
  { oracle.size() } -> std::convertible_to<std::size_t>;
  { oracle.dim() } -> std::convertible_to<std::size_t>;
  { oracle.radius() } -> std::convertible_to<double>;
};

/// Exact decoding for multiclass problems by enumeration over the k classes.
///
/// Example i stores psi(x_i, j) as column j of its block; the label is the 0-based true class.
class MulticlassOracle {
 public:
  MulticlassOracle(CostMatrix cost, std::shared_ptr<const Dataset> data)
      : cost_(std::move(cost)), data_(std::move(data)) {
    if (!data_) throw ConfigError("multiclass oracle needs a dataset");
    if (data_->arity() != cost_.classes())
      throw ConfigError("cost matrix has " + std::to_string(cost_.classes()) + " classes, dataset has " +
                        std::to_string(data_->arity()));
    const auto loss = Loss::multiclass(cost_);
    for (std::size_t i = 0; i < data_->size(); ++i) {
      if (!loss.valid_label(data_->label(i)))
        throw ConfigError("example " + std::to_string(i) + " has an invalid class label");
      for (const auto& col : data_->example(i).columns) radius_ = std::max(radius_, col.norm_l2());
    }
  }

  std::size_t size() const noexcept { return data_->size(); }
  std::size_t dim() const noexcept { return data_->dim(); }
  std::size_t classes() const noexcept { return cost_.classes(); }
  double radius() const noexcept { return radius_; }
  const CostMatrix& cost() const noexcept { return cost_; }
  const Dataset& data() const noexcept { return *data_; }

  Decoding decode(std::span<const double> w, std::size_t i) const {
    const auto& block = data_->example(i);
    const auto y = static_cast<std::size_t>(data_->label(i));
    const double a_y = block.columns[y].dot(w);
    std::size_t best = 0;
    double best_val = -kInfinity;
    for (std::size_t j = 0; j < block.arity(); ++j) {
      const double val = cost_(j, y) - a_y + block.columns[j].dot(w);
      if (val > best_val) {
        best_val = val;
        best = j;
      }
    }
    return Decoding{best, best_val, block.columns[y], block.columns[best], cost_(best, y)};
  }

 private:
  CostMatrix cost_;
  std::shared_ptr<const Dataset> data_;
  double radius_ = 0.0;
};

// Builds the oracle from per-example class feature tables features[i][j] = psi(x_i, j).
inline MulticlassOracle multiclass_oracle(CostMatrix cost, std::vector<std::vector<SparseVec>> features,
                                          std::vector<std::size_t> labels) {
  if (features.empty()) throw ConfigError("multiclass oracle needs at least one example");
  const std::size_t dim = features.front().empty() ? 0 : features.front().front().dim();
  std::vector<ExampleBlock> blocks;
  blocks.reserve(features.size());
  for (auto& row : features) blocks.push_back(ExampleBlock{std::move(row)});
  std::vector<double> y(labels.begin(), labels.end());
  auto data = std::make_shared<const Dataset>(dim, cost.classes(), std::move(blocks), std::move(y));
  return MulticlassOracle(std::move(cost), std::move(data));
}

/// O(d) state of the structured procedure: w, the per-example parts w_i = (lambda n)^{-1} X_i alpha_i,
/// and D_i = phi_i*(-alpha_i). alpha itself is only kept when tracking is requested.
struct StructuredState {
  StructuredState() = default;
  StructuredState(std::size_t n, std::size_t d, std::size_t classes = 0)
      : w(d, 0.0), parts(n, SparseVec(d)), conj(n, 0.0) {
    if (classes > 0) alpha = DualMatrix(classes, n);
  }

  std::vector<double> w;
  std::vector<SparseVec> parts;
  std::vector<double> conj;
  std::optional<DualMatrix> alpha;

  std::size_t size() const noexcept { return parts.size(); }

  // Rebuilds w = sum_i w_i; returns the relative drift of the running w.
  double resum() {
    std::vector<double> fresh(w.size(), 0.0);
    for (const auto& part : parts) part.axpy_into(1.0, fresh);
    double diff = 0.0, top = 0.0;
    for (std::size_t f = 0; f < w.size(); ++f) {
      diff = std::max(diff, std::abs(fresh[f] - w[f]));
      top = std::max({top, std::abs(fresh[f]), std::abs(w[f])});
    }
    w = std::move(fresh);
    return top > 0.0 ? diff / top : diff;
  }
};

struct StructuredStepInfo {
  std::size_t example = 0;
  std::size_t decoded = 0;
  double step = 0.0;
  double loss = 0.0;  // P_i at w^{(t-1)}
};

namespace detail {

// a * x + b * (p - q), merged over sorted supports.
inline SparseVec combine(double a, const SparseVec& x, double b, const SparseVec& p, const SparseVec& q) {
  std::vector<SparseEntry> out;
  out.reserve(x.nnz() + p.nnz() + q.nnz());
  auto ix = x.begin(), ip = p.begin(), iq = q.begin();
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  while (ix != x.end() || ip != p.end() || iq != q.end()) {
    std::size_t f = none;
    if (ix != x.end()) f = std::min(f, ix->index);
    if (ip != p.end()) f = std::min(f, ip->index);
    if (iq != q.end()) f = std::min(f, iq->index);
    double xv = 0.0, diff = 0.0;
    if (ix != x.end() && ix->index == f) xv = (ix++)->value;
    if (ip != p.end() && ip->index == f) diff += (ip++)->value;
    if (iq != q.end() && iq->index == f) diff -= (iq++)->value;
    out.push_back({f, a * xv + b * diff});
  }
  return SparseVec(x.dim(), std::move(out));
}

// w += after - before
inline void apply_difference(std::span<double> w, const SparseVec& before, const SparseVec& after) {
  auto ib = before.begin(), ia = after.begin();
  while (ib != before.end() || ia != after.end()) {
    if (ia == after.end() || (ib != before.end() && ib->index < ia->index)) {
      w[ib->index] -= ib->value;
      ++ib;
    } else if (ib == before.end() || ia->index < ib->index) {
      w[ia->index] += ia->value;
      ++ia;
    } else {
      w[ia->index] += ia->value - ib->value;
      ++ia;
      ++ib;
    }
  }
}

}  // namespace detail

// True label of example i for oracles that expose their dataset.
template <class Oracle>
std::size_t true_label(const Oracle& oracle, std::size_t i) {
  if constexpr (requires { oracle.data().label(i); }) {
    return static_cast<std::size_t>(oracle.data().label(i));
  } else {
    throw ConfigError("alpha tracking needs an oracle that exposes labels");
  }
}

/// One step of the structured procedure at example i:
///   s = (P_i + D_i + lambda n w^T w_i) / (4 R^2 / (lambda n)), clamped to [0, 1]
///   D_i <- (1 - s) D_i - s delta(j, y_i)
///   w_i <- (1 - s) w_i + s (lambda n)^{-1} (psi(x_i, y_i) - psi(x_i, j))
///   w   <- w + (new w_i - old w_i)
template <DecodingOracle Oracle>
StructuredStepInfo structured_step(StructuredState& state, const Oracle& oracle, std::size_t i, double lambda,
                                   double radius) {
  const double lambda_n = lambda * static_cast<double>(state.size());
  const auto dec = oracle.decode(state.w, i);
  auto& part = state.parts[i];
  const double numerator = dec.loss + state.conj[i] + lambda_n * part.dot(state.w);
  const double denominator = 4.0 * radius * radius / lambda_n;
  double s = 0.0;
  if (denominator > 0.0) s = numerator / denominator;
  else s = numerator > 0.0 ? 1.0 : 0.0;
  s = std::clamp(s, 0.0, 1.0);

  StructuredStepInfo info{i, dec.label, s, dec.loss};
  if (s == 0.0) return info;
  state.conj[i] = (1.0 - s) * state.conj[i] - s * dec.cost;
  auto next = detail::combine(1.0 - s, part, s / lambda_n, dec.psi_true, dec.psi_pred);
  detail::apply_difference(state.w, part, next);
  part = std::move(next);
  if (state.alpha) {
    // alpha_i <- (1 - s) alpha_i + s (e_y - e_j)
    auto col = state.alpha->column(i);
    for (double& a : col) a *= (1.0 - s);
    col[dec.label] -= s;
    col[true_label(oracle, i)] += s;
  }
  return info;
}

/// Duality gap from the maintained decomposition with g = 1/2 ||.||_2^2:
///   P = (1/n) sum_i P_i(w) + lambda/2 ||w||^2,  D = -(1/n) sum_i D_i - lambda/2 ||w||^2.
template <DecodingOracle Oracle>
GapReport structured_gap(const StructuredState& state, const Oracle& oracle, double lambda) {
  const auto n = static_cast<double>(state.size());
  double loss_sum = 0.0, conj_sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    loss_sum += oracle.decode(state.w, i).loss;
    conj_sum += state.conj[i];
  }
  for (double x : state.w) sq += x * x;
  GapReport r;
  r.primal = loss_sum / n + 0.5 * lambda * sq;
  r.dual = -conj_sum / n - 0.5 * lambda * sq;
  r.gap = r.primal - r.dual;
  r.decomposed_gap = (loss_sum + conj_sum) / n + lambda * sq;
  r.consistent = std::abs(r.gap - r.decomposed_gap) <= 1e-9 * std::max(1.0, std::abs(r.primal));
  return r;
}

struct StructuredConfig {
  double eps = 0.05;
  std::uint64_t seed = 1;
  std::size_t iterations = 0;  // 0: the structured schedule for eps
  std::size_t burn_in = 0;     // used only when iterations is set explicitly
  std::size_t gap_check_every = 0;
  std::optional<double> target_gap;
  std::optional<double> radius_override;
  bool track_alpha = false;
  double tolerance = 1e-9;
};

struct StructuredResult {
  std::vector<double> weights;  // random output w^{(t*)}, or the final w on early stop
  std::vector<double> output_conj;  // D_i at the output iterate
  GapReport output_gap;
  RunTrace trace;
  StructuredState state;  // the last state
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t output_iteration = 0;
  bool reached_target = false;
  double max_w_drift = 0.0;
};

struct StructuredHooks {
  std::function<void(std::size_t t, const StructuredStepInfo&)> on_step;
};

/// Trains with uniform sampling for T steps and returns the random output over T0+1..T.
/// Index picks and the output pick use the same streams as the generic solver.
template <DecodingOracle Oracle>
StructuredResult train_structured(const Oracle& oracle, double lambda, const StructuredConfig& config,
                                  const StructuredHooks& hooks = {}) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  const std::size_t n = oracle.size();
  if (n == 0) throw ConfigError("empty training set");
  const double radius = config.radius_override.value_or(oracle.radius());
  if (radius < oracle.radius() * (1.0 - 1e-12)) throw ConfigError("R must bound every ||psi(x, y)||_2");
  if (!(radius > 0.0)) throw ConfigError("all feature vectors are zero");

  std::size_t T = config.iterations, T0 = config.burn_in;
  if (T == 0) {
    const auto sched = schedule_structured(n, radius, lambda, config.eps);
    T = sched.iterations;
    T0 = sched.burn_in;
  }
  if (T0 >= T) throw ConfigError("burn-in T0 must be smaller than T");
  const std::size_t check_every = config.gap_check_every == 0 ? n : config.gap_check_every;

  std::size_t classes = 0;
  if (config.track_alpha) {
    if constexpr (requires { oracle.classes(); }) classes = oracle.classes();
    else throw ConfigError("alpha tracking needs an oracle with a fixed class count");
  }
  StructuredResult result;
  result.state = StructuredState(n, oracle.dim(), classes);
  result.burn_in = T0;
  auto& state = result.state;

  IndexSampler sampler(config.seed);
  IndexSampler output_sampler(output_stream_seed(config.seed));
  const std::size_t pick = T0 + 1 + output_sampler.draw(T - T0);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  double last_dual = -kInfinity;
  std::size_t t = 0;
  for (t = 1; t <= T; ++t) {
    const std::size_t i = sampler.draw(n);
    const auto info = structured_step(state, oracle, i, lambda, radius);
    if (hooks.on_step) hooks.on_step(t, info);
    if (t == pick) {
      result.weights = state.w;
      result.output_conj = state.conj;
      result.output_gap = structured_gap(state, oracle, lambda);
      result.output_iteration = t;
    }
    if (t % n == 0) result.max_w_drift = std::max(result.max_w_drift, state.resum());
    if (t % check_every == 0 || t == T) {
      const auto report = structured_gap(state, oracle, lambda);
      if (report.gap < -config.tolerance * std::max(1.0, std::abs(report.primal)))
        throw TraceError("negative duality gap at iteration " + std::to_string(t));
      if (report.dual < last_dual - config.tolerance)
        throw TraceError("dual objective decreased between checkpoints at iteration " + std::to_string(t));
      last_dual = report.dual;
      result.trace.checkpoints.push_back({t, report.primal, report.dual, report.gap, elapsed()});
      if (config.target_gap && report.gap <= *config.target_gap) {
        result.reached_target = true;
        result.weights = state.w;
        result.output_conj = state.conj;
        result.output_gap = report;
        result.output_iteration = t;
        break;
      }
    }
  }
  result.iterations = std::min(t, T);
  return result;
}

}  // namespace proxsdca
