#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proxsdca/error.hpp"
#include "proxsdca/problem.hpp"
#include "proxsdca/random.hpp"

namespace proxsdca {

enum class UpdateOption : int { I = 1, II = 2, III = 3, IV = 4, V = 5 };
enum class OutputMode { final, average, random };

inline const char* to_string(OutputMode m) {
  switch (m) {
    case OutputMode::final: return "final";
    case OutputMode::average: return "average";
    case OutputMode::random: return "random";
  }
  return "?";
}

struct SolverConfig {
  UpdateOption option = UpdateOption::III;
  std::size_t iterations = 0;  // T
  std::size_t burn_in = 0;     // T0
  OutputMode output = OutputMode::final;
  std::uint64_t seed = 1;
  std::size_t gap_check_every = 0;  // 0 means one epoch (n)
  std::optional<double> target_gap;
  std::optional<double> radius_override;
  // Option IV only: replaces ||z||_D^2 (both occurrences) with this upper bound.
  std::optional<double> z_bound;
  double tolerance = 1e-9;

  void validate() const {
    if (iterations == 0) throw ConfigError("T must be at least 1");
    if (burn_in >= iterations) throw ConfigError("burn-in T0 must be smaller than T");
    if (target_gap && !(*target_gap > 0.0)) throw ConfigError("target gap must be positive");
    if (radius_override && !(*radius_override >= 0.0)) throw ConfigError("R override must be >= 0");
    if (z_bound && option != UpdateOption::IV) throw ConfigError("the ||z||^2 bound applies to Option IV only");
    if (z_bound && !(*z_bound > 0.0)) throw ConfigError("the ||z||^2 bound must be positive");
  }
};

// Per-step record. Gains are in units of n * D (the scale of the per-example surrogate).
struct StepDiagnostics {
  std::size_t example = 0;
  double step = std::numeric_limits<double>::quiet_NaN();  // s; NaN for Option I
  double dual_increase = 0.0;                             // D(alpha^t) - D(alpha^{t-1})
  double gap_term = 0.0;  // phi_i(X_i^T w) + phi_i*(-alpha_i) + w^T X_i alpha_i
  double z_norm_sq = 0.0;  // ||u - alpha_i||_D^2
  double op_norm_sq = 0.0;  // ||X_i||^2
  double surrogate_gain = 0.0;  // proximal surrogate at the chosen update, minus its value at 0
  double bound_value = 0.0;  // s [gap_term + (gamma(1-s)/2 - s||X_i||^2/(2 lambda n)) ||z||_D^2]
  std::optional<std::size_t> decoded;  // multiclass loss-augmented argmax
  bool z_bound_used = false;
};

struct Checkpoint {
  std::size_t iteration = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double seconds = 0.0;
};

struct RunTrace {
  std::vector<Checkpoint> checkpoints;
};

// alpha, the incrementally maintained v = (lambda n)^{-1} sum X_i alpha_i, and the
// regularizer mass that makes w_f = grad_f g*(v) an O(1) lookup.
class DualState {
 public:
  explicit DualState(const Problem& problem)
      : alpha(problem.k(), problem.n()), v(problem.d(), 0.0), scale(problem.regularizer().scale_from_mass(0.0)) {}

  DualMatrix alpha;
  std::vector<double> v;
  double mass = 0.0;
  double scale = 1.0;
  std::size_t epoch = 0;

  double weight(const Problem& problem, std::size_t f) const {
    return problem.regularizer().coordinate(v[f], scale);
  }

  std::vector<double> weights(const Problem& problem) const { return problem.regularizer().conj_grad(v); }

  // Recomputes v and the mass from alpha; returns the relative drift of the incremental v.
  double refresh(const Problem& problem) {
    auto fresh = aggregate(problem, alpha);
    double diff = 0.0, top = 0.0;
    for (std::size_t f = 0; f < v.size(); ++f) {
      diff = std::max(diff, std::abs(fresh[f] - v[f]));
      top = std::max({top, std::abs(fresh[f]), std::abs(v[f])});
    }
    v = std::move(fresh);
    mass = problem.regularizer().total_mass(v);
    scale = problem.regularizer().scale_from_mass(mass);
    ++epoch;
    return top > 0.0 ? diff / top : diff;
  }
};

struct StepSettings {
  std::optional<double> radius;  // R for Options IV and V; defaults to the problem's
  std::optional<double> z_bound;
};

inline void check_option_supported(const Loss& loss, UpdateOption option) {
  const auto kind = loss.kind();
  if (option == UpdateOption::I &&
      !(kind == LossKind::squared || kind == LossKind::hinge || kind == LossKind::smoothed_hinge))
    throw UnsupportedOption("Option I has no closed form for the " + loss.name() + " loss");
  if (option == UpdateOption::V && !loss.smoothness_gamma())
    throw UnsupportedOption("Option V is for smooth losses only");
}

inline void check_option_supported(const Problem& problem, UpdateOption option) {
  check_option_supported(problem.loss(), option);
}

/// Single-coordinate Prox-SDCA updates (Options I-V) over a fixed problem.
///
/// Holds scratch buffers so repeated steps do not allocate.
class Stepper {
 public:
  Stepper(const Problem& problem, StepSettings settings = {})
      : problem_(problem),
        settings_(settings),
        scores_(problem.k()),
        subgrad_(problem.k()),
        z_(problem.k()),
        delta_(problem.k()),
        conj_grad_(problem.k()),
        scratch_(problem.k() > 1 ? problem.d() : 0, 0.0) {
    radius_ = settings_.radius.value_or(problem.radius());
    if (radius_ < problem.radius() * (1.0 - 1e-12))
      throw ConfigError("R must bound max_i ||X_i||");
  }

  double radius() const noexcept { return radius_; }

  StepDiagnostics step(DualState& state, std::size_t i, UpdateOption option) {
    switch (option) {
      case UpdateOption::I: return option_I(state, i);
      case UpdateOption::II: return option_II(state, i);
      case UpdateOption::III: return option_III(state, i, false);
      case UpdateOption::IV: return option_III(state, i, true);
      case UpdateOption::V: return option_V(state, i);
    }
    throw UnsupportedOption("unknown option");
  }

  // argmax_delta -phi*(-(alpha_i + delta)) - w^T X_i delta - ||X_i delta||_{D'}^2 / (2 lambda n)
  StepDiagnostics option_I(DualState& state, std::size_t i) {
    check_option_supported(problem_, UpdateOption::I);
    StepDiagnostics diag = prepare(state, i);
    const double y = label(i);
    const double a = scores_[0];
    const double alpha = state.alpha.column(i)[0];
    const double c = diag.op_norm_sq / problem_.lambda_n();
    double next = alpha;
    switch (problem_.loss().kind()) {
      case LossKind::squared:
        next = alpha + (y - a - alpha) / (1.0 + c);
        break;
      case LossKind::hinge: {
        double t = y * alpha;
        const double slope = 1.0 - y * a;
        if (c > 0.0) t += slope / c;
        else if (slope > 0.0) t = 1.0;
        else if (slope < 0.0) t = 0.0;
        next = y * std::clamp(t, 0.0, 1.0);
        break;
      }
      case LossKind::smoothed_hinge: {
        const double gamma = problem_.loss().parameter();
        const double unconstrained = alpha + (y - a - gamma * alpha) / (gamma + c);
        next = y * std::clamp(y * unconstrained, 0.0, 1.0);
        break;
      }
      default: break;
    }
    delta_[0] = next - alpha;
    diag.surrogate_gain = surrogate_gain(state, i, delta_);
    diag.dual_increase = apply(state, i, delta_);
    return diag;
  }

  // Delta = s z, z = u - alpha_i, -u in d phi_i(X_i^T w); s maximizes the proximal
  // surrogate on the feasible part of [0, 1].
  StepDiagnostics option_II(DualState& state, std::size_t i) {
    StepDiagnostics diag = prepare(state, i);
    fill_direction(state, i, diag);
    if (diag.z_norm_sq == 0.0) {
      diag.step = 0.0;
      return diag;
    }
    const auto alpha = state.alpha.column(i);
    const double az = dot(scores_, z_);
    const double quad = weighted_norm_sq(i, z_) / problem_.lambda_n();

    // Largest feasible s; s = 1 is feasible whenever u is an exact subgradient.
    double hi = 1.0;
    if (!std::isfinite(conjugate_along(alpha, i, 1.0))) {
      double lo = 0.0;
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::isfinite(conjugate_along(alpha, i, mid)) ? lo : hi) = mid;
      }
      hi = lo;
    }
    // The surrogate is concave in s; bisect on the sign of its derivative.
    auto slope = [&](double s) { return conjugate_slope(alpha, i, s) - az - s * quad; };
    double s = 0.0;
    if (slope(0.0) <= 0.0) {
      s = 0.0;
    } else if (slope(hi) >= 0.0) {
      s = hi;
    } else {
      double lo = 0.0, up = hi;
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + up);
        (slope(mid) > 0.0 ? lo : up) = mid;
      }
      s = 0.5 * (lo + up);
    }
    for (std::size_t j = 0; j < z_.size(); ++j) delta_[j] = s * z_[j];
    double gain = surrogate_gain(state, i, delta_);
    if (gain < 0.0) {
      s = 0.0;
      std::fill(delta_.begin(), delta_.end(), 0.0);
      gain = 0.0;
    }
    diag.step = s;
    diag.surrogate_gain = gain;
    diag.bound_value = bound(diag, s);
    diag.dual_increase = apply(state, i, delta_);
    return diag;
  }

  // Option III: closed-form s from the per-step lower bound, clamped to [0, 1].
  // Option IV: same with ||X_i||^2 -> R^2 and optionally ||z||_D^2 -> the configured bound.
  StepDiagnostics option_III(DualState& state, std::size_t i, bool use_radius) {
    StepDiagnostics diag = prepare(state, i);
    fill_direction(state, i, diag);
    if (diag.z_norm_sq == 0.0) {
      diag.step = 0.0;
      return diag;
    }
    const double gamma = problem_.loss().smoothness_gamma().value_or(0.0);
    double z_sq = diag.z_norm_sq;
    double x_sq = diag.op_norm_sq;
    if (use_radius) {
      x_sq = radius_ * radius_;
      if (settings_.z_bound) {
        if (*settings_.z_bound < diag.z_norm_sq * (1.0 - 1e-12))
          throw ConfigError("||z||_D^2 = " + std::to_string(diag.z_norm_sq) + " exceeds the configured bound " +
                            std::to_string(*settings_.z_bound) + " at example " + std::to_string(i));
        z_sq = *settings_.z_bound;
        diag.z_bound_used = true;
      }
    }
    const double numerator = diag.gap_term + 0.5 * gamma * z_sq;
    const double denominator = z_sq * (gamma + x_sq / problem_.lambda_n());
    double s = 0.0;
    if (denominator > 0.0) s = numerator / denominator;
    else s = numerator > 0.0 ? 1.0 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    for (std::size_t j = 0; j < z_.size(); ++j) delta_[j] = s * z_[j];
    diag.step = s;
    diag.surrogate_gain = surrogate_gain(state, i, delta_);
    diag.bound_value = bound(diag, s);
    diag.dual_increase = apply(state, i, delta_);
    return diag;
  }

  // Delta = (lambda n gamma / (R^2 + lambda n gamma)) (-grad phi_i(X_i^T w) - alpha_i)
  StepDiagnostics option_V(DualState& state, std::size_t i) {
    check_option_supported(problem_, UpdateOption::V);
    StepDiagnostics diag = prepare(state, i);
    fill_direction(state, i, diag);
    const double gamma = *problem_.loss().smoothness_gamma();
    const double lng = problem_.lambda_n() * gamma;
    const double s = lng / (radius_ * radius_ + lng);
    for (std::size_t j = 0; j < z_.size(); ++j) delta_[j] = s * z_[j];
    diag.step = s;
    diag.surrogate_gain = surrogate_gain(state, i, delta_);
    diag.bound_value = bound(diag, s);
    diag.dual_increase = apply(state, i, delta_);
    return diag;
  }

  // -phi*(-(alpha_i + delta)) + phi*(-alpha_i) - w^T X_i delta - ||X_i delta||_{D'}^2 / (2 lambda n)
  double surrogate_gain(const DualState& state, std::size_t i, std::span<const double> delta) {
    const auto alpha = state.alpha.column(i);
    std::vector<double> moved(alpha.size());
    for (std::size_t j = 0; j < moved.size(); ++j) moved[j] = alpha[j] + delta[j];
    const double before = conjugate_at_negative(problem_, i, alpha);
    const double after = conjugate_at_negative(problem_, i, moved);
    if (!std::isfinite(after)) return -kInfinity;
    return before - after - dot(scores_, delta) - weighted_norm_sq(i, delta) / (2.0 * problem_.lambda_n());
  }

  // Scores X_i^T w at the current state, as seen by the last prepare().
  std::span<const double> scores() const noexcept { return scores_; }

 private:
  double label(std::size_t i) const { return problem_.data().label(i); }

  static double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
    return acc;
  }

  StepDiagnostics prepare(const DualState& state, std::size_t i) {
    StepDiagnostics diag;
    diag.example = i;
    const auto& block = problem_.data().example(i);
    for (std::size_t j = 0; j < block.arity(); ++j) {
      double acc = 0.0;
      for (const auto& e : block.columns[j]) acc += e.value * state.weight(problem_, e.index);
      scores_[j] = acc;
    }
    const auto alpha = state.alpha.column(i);
    const double value = problem_.loss().value(label(i), scores_);
    diag.gap_term = value + conjugate_at_negative(problem_, i, alpha) + dot(scores_, alpha);
    const double xn = problem_.example_norm(i);
    diag.op_norm_sq = xn * xn;
    if (!problem_.loss().is_scalar()) diag.decoded = problem_.loss().argmax(label(i), scores_).first;
    return diag;
  }

  // z = u - alpha_i with u = -(sub)gradient of phi_i at the current scores.
  void fill_direction(const DualState& state, std::size_t i, StepDiagnostics& diag) {
    problem_.loss().subgradient(label(i), scores_, subgrad_);
    const auto alpha = state.alpha.column(i);
    for (std::size_t j = 0; j < z_.size(); ++j) z_[j] = -subgrad_[j] - alpha[j];
    const double zn = norm(std::span<const double>(z_), problem_.norms().dual);
    diag.z_norm_sq = zn * zn;
  }

  double bound(const StepDiagnostics& diag, double s) const {
    const double gamma = problem_.loss().smoothness_gamma().value_or(0.0);
    return s * (diag.gap_term +
                (0.5 * gamma * (1.0 - s) - 0.5 * s * diag.op_norm_sq / problem_.lambda_n()) * diag.z_norm_sq);
  }

  double conjugate_along(std::span<const double> alpha, std::size_t i, double s) {
    std::vector<double> moved(alpha.size());
    for (std::size_t j = 0; j < moved.size(); ++j) moved[j] = alpha[j] + s * z_[j];
    return conjugate_at_negative(problem_, i, moved);
  }

  // d/ds of -phi*(-(alpha + s z)) = grad phi*(-(alpha + s z))^T z
  double conjugate_slope(std::span<const double> alpha, std::size_t i, double s) {
    std::vector<double> point(alpha.size());
    for (std::size_t j = 0; j < point.size(); ++j) point[j] = -(alpha[j] + s * z_[j]);
    problem_.loss().conjugate_gradient(label(i), point, conj_grad_);
    return dot(conj_grad_, z_);
  }

  // ||X_i c||_{D'}^2
  double weighted_norm_sq(std::size_t i, std::span<const double> coeffs) {
    const auto& block = problem_.data().example(i);
    const Norm which = problem_.norms().weight_dual;
    if (block.arity() == 1) {
      const double n = norm(block.columns[0], which) * std::abs(coeffs[0]);
      return n * n;
    }
    touched_.clear();
    for (std::size_t j = 0; j < block.arity(); ++j) {
      if (coeffs[j] == 0.0) continue;
      for (const auto& e : block.columns[j]) {
        if (scratch_[e.index] == 0.0) touched_.push_back(e.index);
        scratch_[e.index] += coeffs[j] * e.value;
        if (scratch_[e.index] == 0.0) scratch_[e.index] = std::numeric_limits<double>::min();
      }
    }
    double acc = 0.0;
    for (auto f : touched_) {
      const double x = scratch_[f];
      acc = which == Norm::linf ? std::max(acc, x * x) : acc + x * x;
      scratch_[f] = 0.0;
    }
    return acc;
  }

  // Moves alpha_i by delta (projected back onto the conjugate domain for binary losses),
  // updates v and the regularizer mass on the support of X_i, and returns the exact dual increase.
  double apply(DualState& state, std::size_t i, std::span<double> delta) {
    auto alpha = state.alpha.column(i);
    const double y = label(i);
    const double before = conjugate_at_negative(problem_, i, alpha);
    std::vector<double> next(alpha.size());
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = alpha[j] + delta[j];
    if (problem_.loss().is_binary()) {
      next[0] = y * std::clamp(y * next[0], 0.0, 1.0);
      delta[0] = next[0] - alpha[0];
    }
    const double after = conjugate_at_negative(problem_, i, next);
    if (!std::isfinite(after))
      throw DomainError("update left the conjugate domain at example " + std::to_string(i));

    const auto& reg = problem_.regularizer();
    const auto& block = problem_.data().example(i);
    const double inv_ln = 1.0 / problem_.lambda_n();
    double mass_change = 0.0;
    for (std::size_t j = 0; j < block.arity(); ++j) {
      if (delta[j] == 0.0) continue;
      const double c = delta[j] * inv_ln;
      for (const auto& e : block.columns[j]) {
        double& slot = state.v[e.index];
        const double old = slot;
        slot += c * e.value;
        mass_change += reg.coordinate_mass(slot) - reg.coordinate_mass(old);
      }
    }
    double conj_change = mass_change;
    if (reg.kind() == RegularizerKind::l1qnorm) {
      const double old_value = reg.conj_value_from_mass(state.mass);
      if (state.mass > 0.0 && state.mass + mass_change > 0.0)
        conj_change = old_value * std::expm1((2.0 / reg.p()) * std::log1p(mass_change / state.mass));
      else
        conj_change = reg.conj_value_from_mass(state.mass + mass_change) - old_value;
    }
    state.mass += mass_change;
    if (state.mass < 0.0) state.mass = 0.0;
    state.scale = reg.scale_from_mass(state.mass);
    std::copy(next.begin(), next.end(), alpha.begin());

    return (before - after) / static_cast<double>(problem_.n()) - problem_.lambda() * conj_change;
  }

  const Problem& problem_;
  StepSettings settings_;
  double radius_ = 0.0;
  std::vector<double> scores_, subgrad_, z_, delta_, conj_grad_;
  std::vector<double> scratch_;
  std::vector<std::size_t> touched_;
};

inline StepDiagnostics step_option_I(const Problem& p, DualState& s, std::size_t i) {
  return Stepper(p).option_I(s, i);
}
inline StepDiagnostics step_option_II(const Problem& p, DualState& s, std::size_t i) {
  return Stepper(p).option_II(s, i);
}
inline StepDiagnostics step_option_III(const Problem& p, DualState& s, std::size_t i) {
  return Stepper(p).option_III(s, i, false);
}
inline StepDiagnostics step_option_IV(const Problem& p, DualState& s, std::size_t i, StepSettings settings = {}) {
  return Stepper(p, settings).option_III(s, i, true);
}
inline StepDiagnostics step_option_V(const Problem& p, DualState& s, std::size_t i, StepSettings settings = {}) {
  return Stepper(p, settings).option_V(s, i);
}

struct RunResult {
  std::vector<double> weights;  // w-bar
  DualMatrix alpha;             // alpha-bar
  RunTrace trace;
  GapReport output_gap;         // P(w-bar) - D(alpha-bar)
  std::size_t iterations = 0;   // iterations actually executed
  std::size_t output_iteration = 0;
  bool reached_target = false;
  double max_v_drift = 0.0;
};

struct RunHooks {
  std::function<void(std::size_t t, const StepDiagnostics&)> on_step;
};

/// Runs Prox-SDCA for config.iterations steps with uniform i.i.d. example picks.
///
/// Every gap_check_every steps (default: one epoch) the duality gap is evaluated from
/// scratch and appended to the trace; v is rebuilt from alpha once per epoch. With a
/// target gap the run stops at the first checkpoint that meets it and returns that
/// (certified) iterate regardless of the output mode. Otherwise:
///   final   -> (w^T, alpha^T)
///   average -> means of w^{t-1}, alpha^{t-1} over t = T0+1..T
///   random  -> (w^t, alpha^t) for one seeded uniform t in T0+1..T
inline RunResult run(const Problem& problem, const SolverConfig& config, const RunHooks& hooks = {}) {
  config.validate();
  check_option_supported(problem, config.option);
  const std::size_t n = problem.n();
  const std::size_t T = config.iterations;
  const std::size_t T0 = config.burn_in;
  const std::size_t check_every = config.gap_check_every == 0 ? n : config.gap_check_every;

  Stepper stepper(problem, StepSettings{config.radius_override, config.z_bound});
  DualState state(problem);
  IndexSampler sampler(config.seed);
  std::size_t pick = T;
  if (config.output == OutputMode::random) {
    IndexSampler output_sampler(output_stream_seed(config.seed));
    pick = T0 + 1 + output_sampler.draw(T - T0);
  }

  RunResult result;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  // Averaging: w^{t-1} summed densely; alpha_i summed lazily over the span it was constant.
  std::vector<double> w_sum, alpha_sum;
  std::vector<std::size_t> since;
  if (config.output == OutputMode::average) {
    w_sum.assign(problem.d(), 0.0);
    alpha_sum.assign(problem.k() * n, 0.0);
    since.assign(n, 1);
  }
  auto credit_alpha = [&](std::size_t i, std::size_t through) {
    const std::size_t from = std::max(since[i], T0 + 1);
    if (through < from) return;
    const auto count = static_cast<double>(through - from + 1);
    const auto col = state.alpha.column(i);
    for (std::size_t j = 0; j < col.size(); ++j) alpha_sum[i * problem.k() + j] += count * col[j];
  };

  std::vector<double> picked_w;
  DualMatrix picked_alpha;
  double last_dual = -kInfinity;
  std::size_t t = 0;
  for (t = 1; t <= T; ++t) {
    if (config.output == OutputMode::average && t > T0) {
      for (std::size_t f = 0; f < problem.d(); ++f) w_sum[f] += state.weight(problem, f);
    }
    const std::size_t i = sampler.draw(n);
    if (config.output == OutputMode::average) credit_alpha(i, t);
    const auto diag = stepper.step(state, i, config.option);
    if (config.output == OutputMode::average) since[i] = t + 1;
    if (diag.dual_increase < -config.tolerance)
      throw TraceError("dual decreased by " + std::to_string(-diag.dual_increase) + " at iteration " +
                       std::to_string(t));
    if (hooks.on_step) hooks.on_step(t, diag);
    if (t == pick) {
      picked_w = state.weights(problem);
      picked_alpha = state.alpha;
    }
    if (t % n == 0) result.max_v_drift = std::max(result.max_v_drift, state.refresh(problem));
    if (t % check_every == 0 || t == T) {
      const auto report = duality_gap(problem, state.alpha);
      if (!report.consistent)
        throw TraceError("gap decomposition mismatch at iteration " + std::to_string(t));
      if (report.gap < -config.tolerance * std::max(1.0, std::abs(report.primal)))
        throw TraceError("negative duality gap at iteration " + std::to_string(t));
      if (report.dual < last_dual - config.tolerance)
        throw TraceError("dual objective decreased between checkpoints at iteration " + std::to_string(t));
      last_dual = report.dual;
      result.trace.checkpoints.push_back({t, report.primal, report.dual, report.gap, elapsed()});
      if (config.target_gap && report.gap <= *config.target_gap) {
        result.reached_target = true;
        break;
      }
    }
  }
  result.iterations = std::min(t, T);

  if (result.reached_target || config.output == OutputMode::final) {
    result.weights = state.weights(problem);
    result.alpha = state.alpha;
    result.output_iteration = result.iterations;
  } else if (config.output == OutputMode::random) {
    result.weights = std::move(picked_w);
    result.alpha = std::move(picked_alpha);
    result.output_iteration = pick;
  } else {
    for (std::size_t i = 0; i < n; ++i) credit_alpha(i, T);
    const auto window = static_cast<double>(T - T0);
    result.weights.resize(problem.d());
    for (std::size_t f = 0; f < problem.d(); ++f) result.weights[f] = w_sum[f] / window;
    result.alpha = DualMatrix(problem.k(), n);
    for (std::size_t q = 0; q < alpha_sum.size(); ++q) result.alpha.raw()[q] = alpha_sum[q] / window;
    result.output_iteration = T;
  }
  result.output_gap = gap_at(problem, result.weights, result.alpha);
  return result;
}

}  // namespace proxsdca
