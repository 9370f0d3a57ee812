#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "proxsdca/error.hpp"
#include "proxsdca/sparse.hpp"

namespace proxsdca {

enum class Norm { abs, l1, l2, linf };

inline const char* to_string(Norm n) {
  switch (n) {
    case Norm::abs: return "abs";
    case Norm::l1: return "l1";
    case Norm::l2: return "l2";
    case Norm::linf: return "linf";
  }
  return "?";
}

inline Norm dual_of(Norm n) {
  switch (n) {
    case Norm::abs: return Norm::abs;
    case Norm::l1: return Norm::linf;
    case Norm::linf: return Norm::l1;
    case Norm::l2: return Norm::l2;
  }
  return n;
}

inline double norm(std::span<const double> x, Norm which) {
  double acc = 0.0;
  switch (which) {
    case Norm::abs:
    case Norm::l1:
      for (double v : x) acc += std::abs(v);
      return acc;
    case Norm::l2:
      for (double v : x) acc += v * v;
      return std::sqrt(acc);
    case Norm::linf:
      for (double v : x) acc = std::max(acc, std::abs(v));
      return acc;
  }
  return acc;
}

inline double norm(const SparseVec& x, Norm which) {
  switch (which) {
    case Norm::abs:
    case Norm::l1: return x.norm_l1();
    case Norm::l2: return x.norm_l2();
    case Norm::linf: return x.norm_linf();
  }
  return 0.0;
}

// (||.||_P, ||.||_D, ||.||_D') for a loss/regularizer combination. ||.||_D is the dual of
// ||.||_P and measures dual vectors alpha_i; ||.||_D' measures X_i * dalpha_i.
struct NormPair {
  Norm primal = Norm::abs;
  Norm dual = Norm::abs;
  Norm weight_dual = Norm::l2;

  static NormPair make(Norm dual_norm, Norm weight_dual_norm) {
    return NormPair{dual_of(dual_norm), dual_norm, weight_dual_norm};
  }

  friend bool operator==(const NormPair&, const NormPair&) = default;
};

// ||X_i|| = sup_{u != 0} ||X_i u||_{D'} / ||u||_D, exact for the supported pairs.
inline double op_norm(const ExampleBlock& block, const NormPair& norms) {
  if (norms.dual == Norm::abs) {
    if (block.arity() != 1) throw UnsupportedNormPair("abs dual norm requires a single column");
    if (norms.weight_dual == Norm::l2) return block.columns.front().norm_l2();
    if (norms.weight_dual == Norm::linf) return block.columns.front().norm_linf();
  } else if (norms.dual == Norm::l1 && norms.weight_dual == Norm::l2) {
    double best = 0.0;
    for (const auto& col : block.columns) best = std::max(best, col.norm_l2());
    return best;
  }
  throw UnsupportedNormPair(std::string("unsupported norm pair (D=") + to_string(norms.dual) +
                            ", D'=" + to_string(norms.weight_dual) + ")");
}

}  // namespace proxsdca
