#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proxsdca/error.hpp"

namespace proxsdca {

struct SparseEntry {
  std::size_t index;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sparse vector with strictly increasing indices and no stored zeros.
class SparseVec {
 public:
  SparseVec() = default;

  explicit SparseVec(std::size_t dim) : dim_(dim) {}

  SparseVec(std::size_t dim, std::vector<SparseEntry> entries)
      : dim_(dim), entries_(std::move(entries)) {
    std::erase_if(entries_, [](const SparseEntry& e) { return e.value == 0.0; });
    for (std::size_t p = 0; p < entries_.size(); ++p) {
      const auto& e = entries_[p];
      if (e.index >= dim_)
        throw Error("sparse index " + std::to_string(e.index) + " out of range for dim " +
                    std::to_string(dim_));
      if (!std::isfinite(e.value)) throw Error("non-finite sparse value");
      if (p > 0 && entries_[p - 1].index >= e.index)
        throw Error("sparse indices must be strictly increasing");
    }
  }

  static SparseVec from_dense(std::span<const double> dense) {
    std::vector<SparseEntry> entries;
    for (std::size_t f = 0; f < dense.size(); ++f)
      if (dense[f] != 0.0) entries.push_back({f, dense[f]});
    return SparseVec(dense.size(), std::move(entries));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<SparseEntry>& entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  double dot(std::span<const double> dense) const {
    double acc = 0.0;
    for (const auto& e : entries_) acc += e.value * dense[e.index];
    return acc;
  }

  // dense += scale * this
  void axpy_into(double scale, std::span<double> dense) const {
    for (const auto& e : entries_) dense[e.index] += scale * e.value;
  }

  double norm_l1() const {
    double acc = 0.0;
    for (const auto& e : entries_) acc += std::abs(e.value);
    return acc;
  }
  double squared_norm() const {
    double acc = 0.0;
    for (const auto& e : entries_) acc += e.value * e.value;
    return acc;
  }
  double norm_l2() const { return std::sqrt(squared_norm()); }
  double norm_linf() const {
    double acc = 0.0;
    for (const auto& e : entries_) acc = std::max(acc, std::abs(e.value));
    return acc;
  }

  std::vector<double> to_dense() const {
    std::vector<double> out(dim_, 0.0);
    for (const auto& e : entries_) out[e.index] = e.value;
    return out;
  }

  friend bool operator==(const SparseVec&, const SparseVec&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<SparseEntry> entries_;
};

// One example's feature matrix X_i in R^{d x k}, stored as k sparse columns.
struct ExampleBlock {
  std::vector<SparseVec> columns;

  std::size_t arity() const noexcept { return columns.size(); }
  std::size_t dim() const noexcept { return columns.empty() ? 0 : columns.front().dim(); }

  // out_j = column_j . w
  void transpose_times(std::span<const double> w, std::span<double> out) const {
    for (std::size_t j = 0; j < columns.size(); ++j) out[j] = columns[j].dot(w);
  }

  friend bool operator==(const ExampleBlock&, const ExampleBlock&) = default;
};

class Dataset {
 public:
  Dataset(std::size_t dim, std::size_t arity, std::vector<ExampleBlock> examples,
          std::vector<double> labels)
      : dim_(dim), arity_(arity), examples_(std::move(examples)), labels_(std::move(labels)) {
    if (examples_.empty()) throw Error("dataset needs at least one example");
    if (arity_ == 0) throw Error("dataset arity must be positive");
    if (labels_.size() != examples_.size()) throw Error("label count does not match example count");
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      const auto& block = examples_[i];
      if (block.arity() != arity_)
        throw Error("example " + std::to_string(i) + " has arity " + std::to_string(block.arity()) +
                    ", expected " + std::to_string(arity_));
      for (const auto& col : block.columns)
        if (col.dim() != dim_)
          throw Error("example " + std::to_string(i) + " has a column of dim " +
                      std::to_string(col.dim()) + ", expected " + std::to_string(dim_));
    }
  }

  // Scalar-loss dataset: one column per example.
  static Dataset from_rows(std::size_t dim, std::vector<SparseVec> rows, std::vector<double> labels) {
    std::vector<ExampleBlock> blocks;
    blocks.reserve(rows.size());
    for (auto& r : rows) blocks.push_back(ExampleBlock{{std::move(r)}});
    return Dataset(dim, 1, std::move(blocks), std::move(labels));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t arity() const noexcept { return arity_; }
  std::size_t size() const noexcept { return examples_.size(); }
  const ExampleBlock& example(std::size_t i) const { return examples_[i]; }
  const std::vector<ExampleBlock>& examples() const noexcept { return examples_; }
  double label(std::size_t i) const { return labels_[i]; }
  const std::vector<double>& labels() const noexcept { return labels_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_;
  std::size_t arity_;
  std::vector<ExampleBlock> examples_;
  std::vector<double> labels_;
};

// Multiclass instance with class-blocked feature map: psi(x, j) places x in block j.
inline ExampleBlock class_blocked(const SparseVec& x, std::size_t classes) {
  ExampleBlock block;
  block.columns.reserve(classes);
  const std::size_t width = x.dim();
  for (std::size_t j = 0; j < classes; ++j) {
    std::vector<SparseEntry> shifted;
    shifted.reserve(x.nnz());
    for (const auto& e : x) shifted.push_back({e.index + j * width, e.value});
    block.columns.emplace_back(width * classes, std::move(shifted));
  }
  return block;
}

}  // namespace proxsdca
