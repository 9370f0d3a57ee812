#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "proxsdca/error.hpp"

namespace proxsdca {

namespace detail {

inline std::size_t ceil_nonneg(double x) { return x <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(x)); }

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive");
}

}  // namespace detail

// Iterations after which the expected gap of the last iterate is at most eps for
// (1/gamma)-smooth losses: (n + R^2/(lambda gamma)) ln((n + R^2/(lambda gamma)) / eps).
inline std::size_t schedule_smooth(std::size_t n, double radius, double lambda, double gamma, double eps) {
  detail::require_positive(static_cast<double>(n), "n");
  detail::require_positive(lambda, "lambda");
  detail::require_positive(gamma, "gamma");
  detail::require_positive(eps, "eps");
  const double base = static_cast<double>(n) + radius * radius / (lambda * gamma);
  return std::max<std::size_t>(1, detail::ceil_nonneg(base * std::log(base / eps)));
}

// Burn-in for the averaged / random output of a smooth run with T - T0 = window.
inline std::size_t schedule_smooth_burn_in(std::size_t n, double radius, double lambda, double gamma,
                                           double eps, std::size_t window) {
  detail::require_positive(static_cast<double>(window), "window");
  const double base = static_cast<double>(n) + radius * radius / (lambda * gamma);
  return detail::ceil_nonneg(base * std::log(base / (static_cast<double>(window) * eps)));
}

struct LipschitzSchedule {
  std::size_t t0 = 0;          // geometric phase, run with s = 1
  std::size_t burn_in = 0;     // T0
  std::size_t iterations = 0;  // T
};

/// Schedule for L-Lipschitz losses given a bound G on G^{(t)}.
///
/// Uses the sufficient conditions T0 >= t0 + max(0, 4G/(lambda eps) - 2n) and
/// T - T0 >= max(n, G/(lambda eps)), then raises T to the closed-form display
/// t0_display + n + 5G/(lambda eps) so the returned T also meets that bound.
/// `log_g` is the G used inside t0 = max(0, ceil(n ln(2 lambda n / G))).
inline LipschitzSchedule lipschitz_schedule(std::size_t n, double g_bound, double log_g, double lambda,
                                            double eps) {
  detail::require_positive(static_cast<double>(n), "n");
  detail::require_positive(g_bound, "G");
  detail::require_positive(lambda, "lambda");
  detail::require_positive(eps, "eps");
  const double nd = static_cast<double>(n);
  LipschitzSchedule s;
  s.t0 = detail::ceil_nonneg(nd * std::log(2.0 * lambda * nd / log_g));
  s.burn_in = s.t0 + detail::ceil_nonneg(4.0 * g_bound / (lambda * eps) - 2.0 * nd);
  const std::size_t window = std::max(n, detail::ceil_nonneg(g_bound / (lambda * eps)));
  const std::size_t display = s.t0 + n + detail::ceil_nonneg(5.0 * g_bound / (lambda * eps));
  s.iterations = std::max(s.burn_in + window, display);
  return s;
}

// G <= 4 R^2 L^2: T = t0 + n + 20 (RL)^2 / (lambda eps).
inline LipschitzSchedule schedule_lipschitz(std::size_t n, double radius, double lipschitz, double lambda,
                                            double eps) {
  detail::require_positive(radius * lipschitz, "R*L");
  const double g = 4.0 * radius * radius * lipschitz * lipschitz;
  return lipschitz_schedule(n, g, g, lambda, eps);
}

// Structured output with ||z||_1^2 <= 4: G <= 4 R^2, so the constant 20 on (2R)^2 drops to 5.
// t0 keeps the (2R)^{-2} factor of the general Lipschitz bound (L = 2).
inline LipschitzSchedule schedule_structured(std::size_t n, double radius, double lambda, double eps) {
  detail::require_positive(radius, "R");
  return lipschitz_schedule(n, 4.0 * radius * radius, 16.0 * radius * radius, lambda, eps);
}

}  // namespace proxsdca
