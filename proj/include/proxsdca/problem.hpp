#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proxsdca/error.hpp"
#include "proxsdca/loss.hpp"
#include "proxsdca/norms.hpp"
#include "proxsdca/regularizer.hpp"
#include "proxsdca/sparse.hpp"

namespace proxsdca {

// min_w P(w) = (1/n) sum_i phi_i(X_i^T w) + lambda g(w).
// Immutable after construction; safe to share across concurrent runs.
class Problem {
 public:
  Problem(std::shared_ptr<const Dataset> data, Loss loss, Regularizer reg, double lambda,
          std::optional<double> radius = std::nullopt)
      : data_(std::move(data)), loss_(std::move(loss)), reg_(std::move(reg)), lambda_(lambda) {
    if (!data_) throw ConfigError("problem needs a dataset");
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw ConfigError("lambda must be positive");
    if (loss_.arity() != data_->arity())
      throw ConfigError("loss arity " + std::to_string(loss_.arity()) + " does not match dataset arity " +
                        std::to_string(data_->arity()));
    if (reg_.kind() == RegularizerKind::l1qnorm && reg_.dim() != data_->dim())
      throw ConfigError("q-norm regularizer dimension does not match dataset");
    for (std::size_t i = 0; i < data_->size(); ++i)
      if (!loss_.valid_label(data_->label(i)))
        throw ConfigError("example " + std::to_string(i) + " has a label invalid for " + loss_.name());

    norms_ = NormPair::make(loss_.is_scalar() ? Norm::abs : Norm::l1, reg_.weight_dual_norm());
    op_norms_.reserve(data_->size());
    double max_norm = 0.0;
    for (const auto& block : data_->examples()) {
      op_norms_.push_back(op_norm(block, norms_));
      max_norm = std::max(max_norm, op_norms_.back());
    }
    if (radius) {
      if (*radius < max_norm * (1.0 - 1e-12))
        throw ConfigError("R = " + std::to_string(*radius) + " is below max_i ||X_i|| = " +
                          std::to_string(max_norm));
      radius_ = *radius;
    } else {
      radius_ = max_norm;
    }

    double mean_at_zero = 0.0;
    std::vector<double> zeros(loss_.arity(), 0.0);
    for (std::size_t i = 0; i < data_->size(); ++i) mean_at_zero += loss_.value(data_->label(i), zeros);
    mean_at_zero /= static_cast<double>(data_->size());
    if (mean_at_zero > 1.0 + 1e-12) {
      normalized_ = false;
      warnings_.push_back("(1/n) sum phi_i(0) = " + std::to_string(mean_at_zero) +
                          " exceeds 1; rate schedules are unverified for this problem");
    }
  }

  const Dataset& data() const noexcept { return *data_; }
  const std::shared_ptr<const Dataset>& data_ptr() const noexcept { return data_; }
  const Loss& loss() const noexcept { return loss_; }
  const Regularizer& regularizer() const noexcept { return reg_; }
  double lambda() const noexcept { return lambda_; }
  double radius() const noexcept { return radius_; }
  const NormPair& norms() const noexcept { return norms_; }
  double example_norm(std::size_t i) const { return op_norms_[i]; }
  std::size_t n() const noexcept { return data_->size(); }
  std::size_t d() const noexcept { return data_->dim(); }
  std::size_t k() const noexcept { return data_->arity(); }
  double lambda_n() const noexcept { return lambda_ * static_cast<double>(n()); }

  bool normalization_verified() const noexcept { return normalized_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::shared_ptr<const Dataset> data_;
  Loss loss_;
  Regularizer reg_;
  double lambda_;
  double radius_ = 0.0;
  NormPair norms_;
  std::vector<double> op_norms_;
  bool normalized_ = true;
  std::vector<std::string> warnings_;
};

// Dual matrix alpha in R^{k x n}, column i contiguous.
class DualMatrix {
 public:
  DualMatrix() = default;
  DualMatrix(std::size_t k, std::size_t n) : k_(k), n_(n), data_(k * n, 0.0) {}

  std::size_t arity() const noexcept { return k_; }
  std::size_t size() const noexcept { return n_; }
  std::span<double> column(std::size_t i) { return {data_.data() + i * k_, k_}; }
  std::span<const double> column(std::size_t i) const { return {data_.data() + i * k_, k_}; }
  std::vector<double>& raw() noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  friend bool operator==(const DualMatrix&, const DualMatrix&) = default;

 private:
  std::size_t k_ = 0;
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// v = (lambda n)^{-1} sum_i X_i alpha_i
inline std::vector<double> aggregate(const Problem& problem, const DualMatrix& alpha) {
  std::vector<double> v(problem.d(), 0.0);
  const double scale = 1.0 / problem.lambda_n();
  for (std::size_t i = 0; i < problem.n(); ++i) {
    const auto& block = problem.data().example(i);
    const auto a = alpha.column(i);
    for (std::size_t j = 0; j < block.arity(); ++j)
      if (a[j] != 0.0) block.columns[j].axpy_into(scale * a[j], v);
  }
  return v;
}

struct PrimalImage {
  std::vector<double> v;
  std::vector<double> w;
};

inline PrimalImage dual_to_primal(const Problem& problem, const DualMatrix& alpha) {
  PrimalImage out;
  out.v = aggregate(problem, alpha);
  out.w = problem.regularizer().conj_grad(out.v);
  return out;
}

inline double primal_objective(const Problem& problem, std::span<const double> w) {
  if (w.size() != problem.d()) throw Error("weight vector has wrong dimension");
  std::vector<double> scores(problem.k());
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i) {
    problem.data().example(i).transpose_times(w, scores);
    loss_sum += problem.loss().value(problem.data().label(i), scores);
  }
  return loss_sum / static_cast<double>(problem.n()) + problem.lambda() * problem.regularizer().primal_value(w);
}

// phi_i*(-alpha_i); +inf outside the domain.
inline double conjugate_at_negative(const Problem& problem, std::size_t i, std::span<const double> alpha_i) {
  if (alpha_i.size() == 1) return problem.loss().conjugate(problem.data().label(i), -alpha_i[0]);
  std::vector<double> neg(alpha_i.begin(), alpha_i.end());
  for (double& x : neg) x = -x;
  return problem.loss().conjugate(problem.data().label(i), neg);
}

inline double dual_objective(const Problem& problem, const DualMatrix& alpha, std::span<const double> v) {
  double conj_sum = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i) {
    const double c = conjugate_at_negative(problem, i, alpha.column(i));
    if (!std::isfinite(c))
      throw DomainError("alpha_" + std::to_string(i) + " lies outside the conjugate domain");
    conj_sum += c;
  }
  return -conj_sum / static_cast<double>(problem.n()) - problem.lambda() * problem.regularizer().conj_value(v);
}

inline double dual_objective(const Problem& problem, const DualMatrix& alpha) {
  const auto v = aggregate(problem, alpha);
  return dual_objective(problem, alpha, v);
}

struct GapReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  // (1/n) sum_i [phi_i(X_i^T w) + phi_i*(-alpha_i) + w^T X_i alpha_i]
  double decomposed_gap = 0.0;
  bool consistent = true;
};

// Per-example Fenchel-Young term phi_i(a_i) + phi_i*(-alpha_i) + a_i^T alpha_i, a_i = X_i^T w.
inline double fenchel_term(const Problem& problem, std::size_t i, std::span<const double> w,
                           std::span<const double> alpha_i) {
  std::vector<double> scores(problem.k());
  problem.data().example(i).transpose_times(w, scores);
  double inner = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) inner += scores[j] * alpha_i[j];
  return problem.loss().value(problem.data().label(i), scores) +
         conjugate_at_negative(problem, i, alpha_i) + inner;
}

// Duality gap at (w(alpha), alpha), cross-checked against the per-example decomposition.
inline GapReport duality_gap(const Problem& problem, const DualMatrix& alpha) {
  const auto image = dual_to_primal(problem, alpha);
  GapReport r;
  r.primal = primal_objective(problem, image.w);
  r.dual = dual_objective(problem, alpha, image.v);
  r.gap = r.primal - r.dual;
  double acc = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i) acc += fenchel_term(problem, i, image.w, alpha.column(i));
  r.decomposed_gap = acc / static_cast<double>(problem.n());
  r.consistent = std::abs(r.gap - r.decomposed_gap) <= 1e-9 * std::max(1.0, std::abs(r.primal));
  return r;
}

// P(w) - D(alpha) for an arbitrary primal/dual pair (e.g. averaged outputs).
inline GapReport gap_at(const Problem& problem, std::span<const double> w, const DualMatrix& alpha) {
  GapReport r;
  r.primal = primal_objective(problem, w);
  r.dual = dual_objective(problem, alpha);
  r.gap = r.primal - r.dual;
  r.decomposed_gap = r.gap;
  return r;
}

}  // namespace proxsdca
