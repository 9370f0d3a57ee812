#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "proxsdca/proxsdca.hpp"
#include "proxsdca/reference.hpp"
#include "support.hpp"

using namespace proxsdca;
using testing_support::Gen;

namespace {

// Sparse planted model with labels from its sign; rows scaled to ||x||_2 = 1.
std::shared_ptr<const Dataset> sparse_instance(Gen& g, std::size_t n, std::size_t d, std::size_t support) {
  std::vector<double> truth(d, 0.0);
  for (std::size_t f = 0; f < support; ++f) truth[g.index(d)] = 2.0 * g.normal();
  std::vector<SparseVec> rows;
  std::vector<double> labels;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = g.row(d, 0.3, 1.0);
    labels.push_back(x.dot(truth) >= 0.0 ? 1.0 : -1.0);
    rows.push_back(std::move(x));
  }
  return std::make_shared<const Dataset>(Dataset::from_rows(d, std::move(rows), std::move(labels)));
}

}  // namespace

TEST(L1Lambda, ClosedForms) {
  EXPECT_DOUBLE_EQ(l1_l2_lambda(0.01, 10.0), 1e-4);
  EXPECT_DOUBLE_EQ(0.1 / l1_l2_lambda(0.01, 10.0), 1000.0);
  EXPECT_NEAR(l1_linf_lambda(0.01, 10.0, 100), 7.238e-6, 1e-9);
  EXPECT_EQ(l1_linf_lambda(0.01, 10.0, 100), 0.01 / (3.0 * std::log(100.0) * 100.0));
  EXPECT_THROW(l1_linf_lambda(0.01, 10.0, 2), DimensionError);
}

TEST(L1Config, DefaultsAndValidation) {
  L1Config c;
  c.sigma = 0.1;
  EXPECT_DOUBLE_EQ(c.effective_bound(), 10.0);
  c.bound = 3.0;
  EXPECT_DOUBLE_EQ(c.effective_bound(), 3.0);
  c.eps = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.eps = 0.1;
  c.sigma = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SolveL1, EmittedLambdaAndThreshold) {
  Gen g(1);
  auto data = sparse_instance(g, 60, 12, 3);
  L1Config c;
  c.sigma = 0.1;
  c.eps = 0.05;
  const auto a = solve_l1_l2(data, Loss::smoothed_hinge(1.0), c);
  EXPECT_EQ(a.lambda, 0.05 / 100.0);
  EXPECT_EQ(a.threshold, 0.1 / a.lambda);
  EXPECT_EQ(a.internal_target, 0.025);
  const auto b = solve_l1_linf(data, Loss::smoothed_hinge(1.0), c);
  EXPECT_DOUBLE_EQ(b.lambda, 0.05 / (3.0 * std::log(12.0) * 100.0));
}

TEST(SolveL1, LinfVariantRejectsTinyDimension) {
  Gen g(2);
  auto data = sparse_instance(g, 10, 2, 1);
  L1Config c;
  EXPECT_THROW(solve_l1_linf(data, Loss::hinge(), c), DimensionError);
}

TEST(SolveL1, RejectsMulticlassLoss) {
  Gen g(3);
  auto data = testing_support::multiclass_dataset(g, 3, 10, 3);
  L1Config c;
  EXPECT_THROW(solve_l1_l2(data, Loss::multiclass(CostMatrix::zero_one(3)), c), UnsupportedOption);
}

// The composite objective dominates the original l1 objective at every w.
TEST(Properties, CompositeDominatesOriginal) {
  Gen g(4);
  auto data = sparse_instance(g, 40, 15, 4);
  const double sigma = 0.05, eps = 0.02, bound = 20.0;
  const Loss loss = Loss::logistic();
  const double l2_lambda = l1_l2_lambda(eps, bound), linf_lambda = l1_linf_lambda(eps, bound, 15);
  Problem l2(data, loss, Regularizer::l1l2(sigma / l2_lambda), l2_lambda);
  Problem linf(data, loss, Regularizer::l1qnorm(15, sigma / linf_lambda), linf_lambda);
  for (int t = 0; t < 200; ++t) {
    const auto w = g.vec(15, std::pow(10.0, g.uniform(-2.0, 1.0)));
    const double original = l1_objective(*data, loss, sigma, w);
    EXPECT_LE(original, primal_objective(l2, w) + 1e-12);
    EXPECT_LE(original, primal_objective(linf, w) + 1e-12);
  }
}

TEST(CertifyL1, IdentityAndNegativeControl) {
  Gen g(5);
  auto data = sparse_instance(g, 80, 10, 3);
  const Loss loss = Loss::smoothed_hinge(1.0);
  const auto ref = reference::prox_grad_l1_reference(*data, loss, 0.05);
  const auto same = certify_l1(*data, loss, 0.05, ref.weights, ref.weights, 0.01);
  EXPECT_EQ(same.difference, 0.0);
  EXPECT_TRUE(same.pass);
  const auto random = g.vec(10, 3.0);
  const auto bad = certify_l1(*data, loss, 0.05, random, ref.weights, 0.01);
  EXPECT_GT(bad.difference, 0.01);
  EXPECT_FALSE(bad.pass);
}

TEST(SolveL1, EndToEndBothVariants) {
  Gen g(6);
  auto data = sparse_instance(g, 150, 30, 4);
  const Loss loss = Loss::smoothed_hinge(1.0);
  L1Config c;
  c.sigma = 0.05;
  c.eps = 0.02;
  const auto ref = reference::prox_grad_l1_reference(*data, loss, c.sigma);
  for (auto variant : {L1Variant::l2_instances, L1Variant::linf_instances}) {
    c.variant = variant;
    const auto r = solve_l1(data, loss, c);
    EXPECT_TRUE(r.reached_target());
    EXPECT_LE(r.run.trace.checkpoints.back().gap, c.eps / 2.0);
    const auto cert = certify_l1(*data, loss, c.sigma, r.weights, ref.weights, c.eps);
    EXPECT_TRUE(cert.pass) << "difference " << cert.difference;
    EXPECT_GE(cert.difference, -1e-6);
  }
}

TEST(SolveL1, WarnsWhenSolutionExceedsBound) {
  Gen g(7);
  auto data = sparse_instance(g, 60, 8, 2);
  L1Config c;
  c.sigma = 0.001;
  c.eps = 0.05;
  c.bound = 1.0;
  const auto r = solve_l1_l2(data, Loss::smoothed_hinge(1.0), c);
  bool warned = false;
  for (const auto& w : r.warnings) warned = warned || w.find("exceeds B") != std::string::npos;
  EXPECT_TRUE(warned) << "||w||_2 = " << norm(std::span<const double>(r.weights), Norm::l2);
}
