#pragma once

// Hand-rolled generators for property tests and fixtures.

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "proxsdca/proxsdca.hpp"

namespace testing_support {

using namespace proxsdca;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  bool coin(double p = 0.5) { return uniform() < p; }

  // Gaussian entries, each kept with probability density, then scaled so that ||x||_2 = radius.
  SparseVec row(std::size_t d, double density, double radius) {
    std::vector<double> dense(d, 0.0);
    bool any = false;
    for (auto& x : dense)
      if (coin(density)) {
        x = normal();
        any = true;
      }
    if (!any) dense[index(d)] = 1.0;
    double sq = 0.0;
    for (double x : dense) sq += x * x;
    const double scale = radius / std::sqrt(sq);
    for (auto& x : dense) x *= scale;
    return SparseVec::from_dense(dense);
  }

  std::vector<double> vec(std::size_t d, double scale = 1.0) {
    std::vector<double> v(d);
    for (auto& x : v) x = scale * normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

// Labels from a planted linear model: sign for binary losses, value + noise for squared.
inline std::shared_ptr<const Dataset> scalar_dataset(Gen& g, const Loss& loss, std::size_t n, std::size_t d,
                                                     double density = 0.5, double radius = 1.0,
                                                     double flip = 0.1) {
  const auto truth = g.vec(d);
  std::vector<SparseVec> rows;
  std::vector<double> labels;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = g.row(d, density, radius);
    const double score = x.dot(truth);
    if (loss.kind() == LossKind::squared) {
      labels.push_back(0.5 * score + 0.1 * g.normal());
    } else {
      double y = score >= 0.0 ? 1.0 : -1.0;
      if (g.coin(flip)) y = -y;
      labels.push_back(y);
    }
    rows.push_back(std::move(x));
  }
  return std::make_shared<const Dataset>(Dataset::from_rows(d, std::move(rows), std::move(labels)));
}

// Class-blocked multiclass data: the label is the argmax of k planted scores.
inline std::shared_ptr<const Dataset> multiclass_dataset(Gen& g, std::size_t classes, std::size_t n,
                                                         std::size_t width, double density = 0.5,
                                                         double radius = 1.0, double flip = 0.1) {
  std::vector<std::vector<double>> truth;
  for (std::size_t j = 0; j < classes; ++j) truth.push_back(g.vec(width));
  std::vector<ExampleBlock> blocks;
  std::vector<double> labels;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = g.row(width, density, radius);
    std::size_t best = 0;
    double best_val = -1e300;
    for (std::size_t j = 0; j < classes; ++j) {
      const double s = x.dot(truth[j]);
      if (s > best_val) {
        best_val = s;
        best = j;
      }
    }
    if (g.coin(flip)) best = g.index(classes);
    labels.push_back(static_cast<double>(best));
    blocks.push_back(class_blocked(x, classes));
  }
  return std::make_shared<const Dataset>(width * classes, classes, std::move(blocks), std::move(labels));
}

inline Regularizer regularizer_of(RegularizerKind kind, std::size_t d, double threshold) {
  switch (kind) {
    case RegularizerKind::l2: return Regularizer::l2();
    case RegularizerKind::l1l2: return Regularizer::l1l2(threshold);
    case RegularizerKind::l1qnorm: return Regularizer::l1qnorm(d, threshold);
  }
  return Regularizer::l2();
}

// A dual-feasible alpha drawn at random (interior or boundary points of each conjugate domain).
inline DualMatrix random_feasible_alpha(Gen& g, const Problem& problem) {
  DualMatrix alpha(problem.k(), problem.n());
  for (std::size_t i = 0; i < problem.n(); ++i) {
    auto col = alpha.column(i);
    const double y = problem.data().label(i);
    if (problem.loss().kind() == LossKind::squared) {
      col[0] = g.normal();
    } else if (problem.loss().is_binary()) {
      const double r = g.uniform();
      col[0] = y * (r < 0.1 ? 0.0 : r > 0.9 ? 1.0 : g.uniform());
    } else {
      // -alpha_i = beta with beta_j >= 0 off y, sum_{j != y} beta_j <= 1, beta_y = -sum
      const auto yi = static_cast<std::size_t>(y);
      double total = 0.0;
      std::vector<double> beta(col.size(), 0.0);
      for (std::size_t j = 0; j < col.size(); ++j)
        if (j != yi) total += (beta[j] = g.uniform());
      const double mass = g.uniform();
      double sum = 0.0;
      for (std::size_t j = 0; j < col.size(); ++j)
        if (j != yi) sum += (beta[j] *= mass / total);
      beta[yi] = -sum;
      for (std::size_t j = 0; j < col.size(); ++j) col[j] = -beta[j];
    }
  }
  return alpha;
}

}  // namespace testing_support
