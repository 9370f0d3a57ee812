#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proxsdca/error.hpp"

namespace proxsdca {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Slack accepted at conjugate-domain boundaries; iterates that land on a face of the
// domain carry rounding error of a few ulps.
inline constexpr double kDomainSlack = 1e-10;

// delta(j, y) >= 0 with delta(y, y) = 0, row j = predicted, column y = true.
class CostMatrix {
 public:
  CostMatrix() = default;

  CostMatrix(std::size_t classes, std::vector<double> entries)
      : classes_(classes), entries_(std::move(entries)) {
    if (classes_ < 2) throw Error("cost matrix needs at least two classes");
    if (entries_.size() != classes_ * classes_)
      throw Error("cost matrix must have k*k entries");
    for (std::size_t j = 0; j < classes_; ++j)
      for (std::size_t y = 0; y < classes_; ++y) {
        const double c = (*this)(j, y);
        if (!std::isfinite(c) || c < 0.0) throw Error("cost entries must be finite and nonnegative");
        if (j == y && c != 0.0) throw Error("cost matrix diagonal must be zero");
      }
  }

  static CostMatrix zero_one(std::size_t classes) {
    std::vector<double> e(classes * classes, 1.0);
    for (std::size_t j = 0; j < classes; ++j) e[j * classes + j] = 0.0;
    return CostMatrix(classes, std::move(e));
  }

  std::size_t classes() const noexcept { return classes_; }
  double operator()(std::size_t predicted, std::size_t truth) const {
    return entries_[predicted * classes_ + truth];
  }
  const std::vector<double>& entries() const noexcept { return entries_; }

  friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

 private:
  std::size_t classes_ = 0;
  std::vector<double> entries_;
};

enum class LossKind { hinge, smoothed_hinge, logistic, squared, multiclass };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::hinge: return "hinge";
    case LossKind::smoothed_hinge: return "smoothed-hinge";
    case LossKind::logistic: return "logistic";
    case LossKind::squared: return "squared";
    case LossKind::multiclass: return "multiclass";
  }
  return "?";
}

namespace detail {

inline double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }

inline double log1pexp(double b) {
  return b > 0.0 ? b + std::log1p(std::exp(-b)) : std::log1p(std::exp(b));
}

}  // namespace detail

// A loss family phi_i. Binary losses act on the margin y*a with y in {-1, +1};
// the squared loss uses y as a real target; the multiclass loss takes y as a class index.
class Loss {
 public:
  static Loss hinge() { return Loss(LossKind::hinge, 0.0); }
  static Loss smoothed_hinge(double gamma = 1.0) {
    if (!(gamma > 0.0)) throw Error("smoothed hinge needs gamma > 0");
    return Loss(LossKind::smoothed_hinge, gamma);
  }
  static Loss logistic() { return Loss(LossKind::logistic, 0.0); }
  static Loss squared() { return Loss(LossKind::squared, 0.0); }
  static Loss multiclass(CostMatrix cost) {
    Loss l(LossKind::multiclass, 0.0);
    l.cost_ = std::move(cost);
    return l;
  }

  LossKind kind() const noexcept { return kind_; }
  std::string name() const { return to_string(kind_); }
  double parameter() const noexcept { return param_; }
  const CostMatrix& cost() const noexcept { return cost_; }
  std::size_t arity() const noexcept { return kind_ == LossKind::multiclass ? cost_.classes() : 1; }
  bool is_scalar() const noexcept { return kind_ != LossKind::multiclass; }
  bool is_binary() const noexcept {
    return kind_ == LossKind::hinge || kind_ == LossKind::smoothed_hinge || kind_ == LossKind::logistic;
  }

  // phi is (1/gamma)-smooth; absent for nonsmooth losses.
  std::optional<double> smoothness_gamma() const {
    switch (kind_) {
      case LossKind::smoothed_hinge: return param_;
      case LossKind::logistic: return 4.0;
      case LossKind::squared: return 1.0;
      default: return std::nullopt;
    }
  }

  // phi is L-Lipschitz w.r.t. ||.||_P; multiclass uses ||.||_inf.
  std::optional<double> lipschitz() const {
    switch (kind_) {
      case LossKind::squared: return std::nullopt;
      case LossKind::multiclass: return 2.0;
      default: return 1.0;
    }
  }

  // Conjugates of L-Lipschitz losses are +inf outside the ||.||_D ball of radius L.
  std::optional<double> conjugate_domain_radius() const { return lipschitz(); }

  bool valid_label(double label) const {
    if (is_binary()) return label == 1.0 || label == -1.0;
    if (kind_ == LossKind::squared) return std::isfinite(label);
    return label >= 0.0 && label == std::floor(label) && label < static_cast<double>(cost_.classes());
  }

  // ---- scalar interface (k = 1) ----

  double value(double label, double a) const {
    const double b = label * a;
    switch (kind_) {
      case LossKind::hinge: return std::max(0.0, 1.0 - b);
      case LossKind::smoothed_hinge:
        if (b >= 1.0) return 0.0;
        if (b <= 1.0 - param_) return 1.0 - b - 0.5 * param_;
        return (1.0 - b) * (1.0 - b) / (2.0 * param_);
      case LossKind::logistic: return detail::log1pexp(-b);
      case LossKind::squared: return 0.5 * (a - label) * (a - label);
      case LossKind::multiclass: break;
    }
    throw Error("scalar value called on multiclass loss");
  }

  // One element of the subdifferential (the gradient for smooth losses).
  double derivative(double label, double a) const {
    const double b = label * a;
    switch (kind_) {
      case LossKind::hinge: return b < 1.0 ? -label : 0.0;
      case LossKind::smoothed_hinge:
        if (b >= 1.0) return 0.0;
        if (b <= 1.0 - param_) return -label;
        return -label * (1.0 - b) / param_;
      case LossKind::logistic: return -label / (1.0 + std::exp(b));
      case LossKind::squared: return a - label;
      case LossKind::multiclass: break;
    }
    throw Error("scalar derivative called on multiclass loss");
  }

  // Closed interval where the conjugate is finite.
  std::pair<double, double> conjugate_domain(double label) const {
    if (kind_ == LossKind::squared) return {-kInfinity, kInfinity};
    // y*u in [-1, 0]
    return label > 0 ? std::pair{-1.0, 0.0} : std::pair{0.0, 1.0};
  }

  // phi*(u) = sup_z (z u - phi(z)); +inf outside the domain.
  double conjugate(double label, double u) const {
    if (kind_ == LossKind::squared) return 0.5 * u * u + u * label;
    if (kind_ == LossKind::multiclass) throw Error("scalar conjugate called on multiclass loss");
    double t = label * u;
    if (t < -1.0 - kDomainSlack || t > kDomainSlack) return kInfinity;
    t = std::clamp(t, -1.0, 0.0);
    switch (kind_) {
      case LossKind::hinge: return t;
      case LossKind::smoothed_hinge: return t + 0.5 * param_ * t * t;
      case LossKind::logistic: return detail::xlogx(-t) + detail::xlogx(1.0 + t);
      default: break;
    }
    return kInfinity;
  }

  // d/du phi*(u) on the domain (one-sided / infinite at logistic endpoints).
  double conjugate_derivative(double label, double u) const {
    if (kind_ == LossKind::squared) return u + label;
    const double t = std::clamp(label * u, -1.0, 0.0);
    switch (kind_) {
      case LossKind::hinge: return label;
      case LossKind::smoothed_hinge: return label * (1.0 + param_ * t);
      case LossKind::logistic: return label * (std::log1p(t) - std::log(-t));
      default: break;
    }
    throw Error("scalar conjugate derivative called on multiclass loss");
  }

  // ---- vector interface ----

  // Gradient of phi* on its domain; the multiclass conjugate is linear there.
  void conjugate_gradient(double label, std::span<const double> u, std::span<double> out) const {
    if (is_scalar()) {
      out[0] = conjugate_derivative(label, u[0]);
      return;
    }
    const auto y = static_cast<std::size_t>(label);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = -cost_(j, y);
  }

  // Loss-augmented argmax max_j (delta(j,y) - a_y + a_j); ties go to the smallest index.
  std::pair<std::size_t, double> argmax(double label, std::span<const double> a) const {
    const auto y = static_cast<std::size_t>(label);
    std::size_t best = 0;
    double best_val = -kInfinity;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double val = cost_(j, y) - a[y] + a[j];
      if (val > best_val) {
        best_val = val;
        best = j;
      }
    }
    return {best, best_val};
  }

  double value(double label, std::span<const double> a) const {
    if (is_scalar()) return value(label, a[0]);
    return argmax(label, a).second;
  }

  // Writes a subgradient into out; multiclass returns e_j - e_y at the argmax j.
  void subgradient(double label, std::span<const double> a, std::span<double> out) const {
    if (is_scalar()) {
      out[0] = derivative(label, a[0]);
      return;
    }
    const auto y = static_cast<std::size_t>(label);
    const auto j = argmax(label, a).first;
    std::fill(out.begin(), out.end(), 0.0);
    out[j] += 1.0;
    out[y] -= 1.0;
  }

  // Multiclass: phi*(beta) = -sum_j beta_j delta(j,y) on
  // {sum_j beta_j = 0, beta_j >= 0 for j != y, sum_{j != y} beta_j <= 1}.
  double conjugate(double label, std::span<const double> u) const {
    if (is_scalar()) return conjugate(label, u[0]);
    const auto y = static_cast<std::size_t>(label);
    double total = 0.0, off_mass = 0.0, val = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      total += u[j];
      scale += std::abs(u[j]);
      val -= u[j] * cost_(j, y);
      if (j == y) continue;
      if (u[j] < -kDomainSlack) return kInfinity;
      off_mass += u[j];
    }
    if (std::abs(total) > kDomainSlack * std::max(1.0, scale)) return kInfinity;
    if (off_mass > 1.0 + kDomainSlack) return kInfinity;
    return val;
  }

  friend bool operator==(const Loss&, const Loss&) = default;

 private:
  Loss(LossKind kind, double param) : kind_(kind), param_(param) {}

  LossKind kind_;
  double param_;
  CostMatrix cost_;
};

}  // namespace proxsdca
