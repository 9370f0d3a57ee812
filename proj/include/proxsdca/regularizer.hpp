#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "proxsdca/error.hpp"
#include "proxsdca/norms.hpp"

namespace proxsdca {

enum class RegularizerKind { l2, l1l2, l1qnorm };

inline const char* to_string(RegularizerKind k) {
  switch (k) {
    case RegularizerKind::l2: return "l2";
    case RegularizerKind::l1l2: return "l1l2";
    case RegularizerKind::l1qnorm: return "l1qnorm";
  }
  return "?";
}

/// A 1-strongly-convex regularizer g with closed-form conjugate gradient.
///
///  - l2:      g(w) = 1/2 ||w||_2^2
///  - l1l2:    g(w) = 1/2 ||w||_2^2 + tau ||w||_1          (1-strongly convex in l2)
///  - l1qnorm: g(w) = (3 ln d / 2) ||w||_q^2 + tau ||w||_1 (1-strongly convex in l1)
///             with q = ln d / (ln d - 1)
///
/// tau is the l1 weight relative to lambda (sigma / lambda in the composite problem).
///
/// Besides the whole-vector maps, the class exposes a "mass" decomposition used by the
/// solver for O(nnz) updates: every kind has g*(v) = F(sum_f m(v_f)) and
/// grad_f g*(v) = c(v_f, scale(sum_f m(v_f))), so one running scalar suffices.
class Regularizer {
 public:
  static Regularizer l2() { return Regularizer(RegularizerKind::l2, 0.0, 0); }

  static Regularizer l1l2(double threshold) {
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) throw Error("l1 threshold must be >= 0");
    return Regularizer(RegularizerKind::l1l2, threshold, 0);
  }

  static Regularizer l1qnorm(std::size_t dim, double threshold) {
    if (dim < 3) throw DimensionError("q-norm regularizer needs d >= 3 (ln d > 1)");
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) throw Error("l1 threshold must be >= 0");
    return Regularizer(RegularizerKind::l1qnorm, threshold, dim);
  }

  RegularizerKind kind() const noexcept { return kind_; }
  std::string name() const { return to_string(kind_); }
  double threshold() const noexcept { return threshold_; }
  std::size_t dim() const noexcept { return dim_; }
  double q() const noexcept { return q_; }
  // Conjugate exponent q / (q - 1), equal to ln d.
  double p() const noexcept { return p_; }
  double log_factor() const noexcept { return log_factor_; }

  // ||.||_{D'}: the norm in which g* is 1-smooth.
  Norm weight_dual_norm() const noexcept {
    return kind_ == RegularizerKind::l1qnorm ? Norm::linf : Norm::l2;
  }

  double primal_value(std::span<const double> w) const {
    const double l1 = norm(w, Norm::l1);
    switch (kind_) {
      case RegularizerKind::l2: return 0.5 * squared_l2(w);
      case RegularizerKind::l1l2: return 0.5 * squared_l2(w) + threshold_ * l1;
      case RegularizerKind::l1qnorm: {
        const double nq = q_norm(w);
        return 0.5 * log_factor_ * nq * nq + threshold_ * l1;
      }
    }
    return 0.0;
  }

  std::vector<double> conj_grad(std::span<const double> v) const {
    std::vector<double> w(v.size(), 0.0);
    if (kind_ != RegularizerKind::l1qnorm) {
      for (std::size_t f = 0; f < v.size(); ++f) w[f] = coordinate(v[f], 1.0);
      return w;
    }
    // w_f = (N / c) (t_f / N)^{p-1}, N = ||t||_p, the max-normalized form of the closed form.
    const double n_p = p_norm_of_excess(v);
    if (n_p == 0.0) return w;
    for (std::size_t f = 0; f < v.size(); ++f) {
      const double t = std::abs(v[f]) - threshold_;
      if (t <= 0.0) continue;
      w[f] = std::copysign(n_p / log_factor_ * std::pow(t / n_p, p_ - 1.0), v[f]);
    }
    return w;
  }

  double conj_value(std::span<const double> v) const {
    if (kind_ != RegularizerKind::l1qnorm) {
      double acc = 0.0;
      for (double x : v) acc += coordinate_mass(x);
      return acc;
    }
    const auto w = conj_grad(v);
    double inner = 0.0;
    for (std::size_t f = 0; f < v.size(); ++f) inner += w[f] * v[f];
    return inner - primal_value(w);
  }

  // Max violation of the optimality conditions of argmax_w (w.v - g(w)) at candidate w.
  double stationarity_residual(std::span<const double> v, std::span<const double> w) const {
    double worst = 0.0;
    double nq = 0.0;
    if (kind_ == RegularizerKind::l1qnorm) nq = q_norm(w);
    for (std::size_t f = 0; f < v.size(); ++f) {
      double r = 0.0;
      if (w[f] == 0.0) {
        r = std::max(0.0, std::abs(v[f]) - threshold_);
      } else {
        const double sgn = w[f] > 0 ? 1.0 : -1.0;
        double smooth_grad = w[f];
        if (kind_ == RegularizerKind::l1qnorm)
          smooth_grad = sgn * log_factor_ * std::pow(std::abs(w[f]), q_ - 1.0) / std::pow(nq, q_ - 2.0);
        const double l1_grad = kind_ == RegularizerKind::l2 ? 0.0 : threshold_ * sgn;
        r = std::abs(v[f] - smooth_grad - l1_grad);
      }
      worst = std::max(worst, r);
    }
    return worst;
  }

  // ---- mass decomposition ----

  double coordinate_mass(double v) const {
    const double t = std::abs(v) - threshold_;
    if (t <= 0.0) return 0.0;
    return kind_ == RegularizerKind::l1qnorm ? std::pow(t, p_) : 0.5 * t * t;
  }

  double conj_value_from_mass(double mass) const {
    if (kind_ != RegularizerKind::l1qnorm) return mass;
    if (mass <= 0.0) return 0.0;
    return std::pow(mass, 2.0 / p_) / (2.0 * log_factor_);
  }

  // The coordinate scale a^{1/(q-1)} = S^{(q-2)/q} / (3 ln d); 1 for separable kinds.
  double scale_from_mass(double mass) const {
    if (kind_ != RegularizerKind::l1qnorm) return 1.0;
    if (mass <= 0.0) return 0.0;
    return std::pow(mass, 2.0 / p_ - 1.0) / log_factor_;
  }

  double coordinate(double v, double scale) const {
    const double t = std::abs(v) - threshold_;
    if (t <= 0.0) return 0.0;
    if (kind_ == RegularizerKind::l1qnorm) return std::copysign(scale * std::pow(t, p_ - 1.0), v);
    return std::copysign(t, v);
  }

  double total_mass(std::span<const double> v) const {
    double acc = 0.0;
    for (double x : v) acc += coordinate_mass(x);
    return acc;
  }

  friend bool operator==(const Regularizer& a, const Regularizer& b) {
    return a.kind_ == b.kind_ && a.threshold_ == b.threshold_ && a.dim_ == b.dim_;
  }

 private:
  Regularizer(RegularizerKind kind, double threshold, std::size_t dim)
      : kind_(kind), threshold_(threshold), dim_(dim) {
    if (kind_ == RegularizerKind::l1qnorm) {
      const double ld = std::log(static_cast<double>(dim_));
      q_ = ld / (ld - 1.0);
      p_ = ld;
      log_factor_ = 3.0 * ld;
    }
  }

  static double squared_l2(std::span<const double> w) {
    double acc = 0.0;
    for (double x : w) acc += x * x;
    return acc;
  }

  double q_norm(std::span<const double> w) const {
    const double top = norm(w, Norm::linf);
    if (top == 0.0) return 0.0;
    double acc = 0.0;
    for (double x : w) acc += std::pow(std::abs(x) / top, q_);
    return top * std::pow(acc, 1.0 / q_);
  }

  double p_norm_of_excess(std::span<const double> v) const {
    double top = 0.0;
    for (double x : v) top = std::max(top, std::abs(x) - threshold_);
    if (top <= 0.0) return 0.0;
    double acc = 0.0;
    for (double x : v) {
      const double t = std::abs(x) - threshold_;
      if (t > 0.0) acc += std::pow(t / top, p_);
    }
    return top * std::pow(acc, 1.0 / p_);
  }

  RegularizerKind kind_;
  double threshold_;
  std::size_t dim_;
  double q_ = 2.0;
  double p_ = 2.0;
  double log_factor_ = 1.0;
};

}  // namespace proxsdca
