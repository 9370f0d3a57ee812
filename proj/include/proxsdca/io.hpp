#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "proxsdca/error.hpp"
#include "proxsdca/loss.hpp"
#include "proxsdca/problem.hpp"
#include "proxsdca/regularizer.hpp"
#include "proxsdca/solver.hpp"
#include "proxsdca/sparse.hpp"

namespace proxsdca::io {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  double x = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

inline std::optional<std::uint64_t> parse_unsigned(std::string_view s) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (p < line.size()) {
    while (p < line.size() && (line[p] == ' ' || line[p] == '\t' || line[p] == '\r')) ++p;
    const std::size_t start = p;
    while (p < line.size() && line[p] != ' ' && line[p] != '\t' && line[p] != '\r') ++p;
    if (p > start) out.push_back(line.substr(start, p - start));
  }
  return out;
}

inline std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

}  // namespace detail

struct SvmlightOptions {
  std::optional<std::size_t> dim;      // feature count; max index when absent
  bool multiclass = false;             // labels are classes 1..k
  std::optional<std::size_t> classes;  // k; max label when absent
};

/// Reads "label idx:val idx:val ..." lines with 1-based strictly increasing indices.
///
/// In multiclass mode labels must be integers in 1..k; examples become class-blocked
/// blocks of width d (so the model dimension is d*k) with 0-based class labels.
inline Dataset parse_svmlight(std::istream& in, const SvmlightOptions& opt = {}) {
  std::vector<SparseVec> rows;
  std::vector<std::vector<SparseEntry>> entries;
  std::vector<double> labels;
  std::vector<std::size_t> line_of;
  std::size_t max_index = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto tokens = detail::split_ws(detail::strip_comment(raw));
    if (tokens.empty()) continue;
    const auto label = parse_double(tokens[0]);
    if (!label || !std::isfinite(*label))
      throw ParseError(line_no, "bad label '" + std::string(tokens[0]) + "'");
    if (opt.multiclass && (*label < 1.0 || *label != std::floor(*label)))
      throw ParseError(line_no, "multiclass labels must be positive integers");
    std::vector<SparseEntry> row;
    row.reserve(tokens.size() - 1);
    std::size_t prev = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "expected idx:val, got '" + std::string(tok) + "'");
      const auto idx = parse_unsigned(tok.substr(0, colon));
      const auto val = parse_double(tok.substr(colon + 1));
      if (!idx || *idx == 0) throw ParseError(line_no, "bad feature index in '" + std::string(tok) + "'");
      if (!val) throw ParseError(line_no, "bad feature value in '" + std::string(tok) + "'");
      if (!std::isfinite(*val)) throw ParseError(line_no, "non-finite feature value");
      if (*idx <= prev) throw ParseError(line_no, "feature indices must be strictly increasing");
      prev = static_cast<std::size_t>(*idx);
      max_index = std::max(max_index, prev);
      if (*val != 0.0) row.push_back({prev - 1, *val});
    }
    entries.push_back(std::move(row));
    labels.push_back(*label);
    line_of.push_back(line_no);
  }
  if (entries.empty()) throw ParseError(line_no, "no examples");
  std::size_t dim = max_index;
  if (opt.dim) {
    if (*opt.dim < max_index)
      throw ParseError(line_no, "feature index " + std::to_string(max_index) + " exceeds dimension " +
                                    std::to_string(*opt.dim));
    dim = *opt.dim;
  }
  if (!opt.multiclass) {
    rows.reserve(entries.size());
    for (auto& e : entries) rows.emplace_back(dim, std::move(e));
    return Dataset::from_rows(dim, std::move(rows), std::move(labels));
  }

  std::size_t classes = 0;
  for (double y : labels) classes = std::max(classes, static_cast<std::size_t>(y));
  if (opt.classes) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (static_cast<std::size_t>(labels[i]) > *opt.classes)
        throw ParseError(line_of[i], "label exceeds the class count " + std::to_string(*opt.classes));
    classes = *opt.classes;
  }
  if (classes < 2) throw ParseError(line_no, "multiclass data needs at least two classes");
  std::vector<ExampleBlock> blocks;
  blocks.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    blocks.push_back(class_blocked(SparseVec(dim, std::move(entries[i])), classes));
    labels[i] -= 1.0;
  }
  return Dataset(dim * classes, classes, std::move(blocks), std::move(labels));
}

inline Dataset read_svmlight(const std::filesystem::path& path, const SvmlightOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_svmlight(in, opt);
}

// Inverse of parse_svmlight. Multiclass datasets are written through their block-0 column.
inline void write_svmlight(std::ostream& out, const Dataset& data) {
  const bool multiclass = data.arity() > 1;
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_double(multiclass ? data.label(i) + 1.0 : data.label(i));
    for (const auto& e : data.example(i).columns[0]) out << ' ' << (e.index + 1) << ':' << format_double(e.value);
    out << '\n';
  }
}

// k lines of k reals; row j is the predicted class, column y the true class.
inline CostMatrix parse_cost_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto tokens = detail::split_ws(detail::strip_comment(raw));
    if (tokens.empty()) continue;
    std::vector<double> row;
    for (auto tok : tokens) {
      const auto v = parse_double(tok);
      if (!v) throw ParseError(line_no, "bad cost '" + std::string(tok) + "'");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(line_no, "cost rows must have equal length");
    rows.push_back(std::move(row));
  }
  const std::size_t k = rows.size();
  if (k == 0 || rows.front().size() != k) throw ParseError(line_no, "cost matrix must be k x k");
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  try {
    return CostMatrix(k, std::move(flat));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
}

inline CostMatrix read_cost_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_cost_matrix(in);
}

// Writes through a temporary file in the same directory, then renames over the target.
inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string format_trace(const RunTrace& trace) {
  std::ostringstream out;
  out << "t,P,D,gap,seconds\n";
  for (const auto& c : trace.checkpoints)
    out << c.iteration << ',' << format_double(c.primal) << ',' << format_double(c.dual) << ','
        << format_double(c.gap) << ',' << format_double(c.seconds) << '\n';
  return out.str();
}

inline void write_trace(const std::filesystem::path& path, const RunTrace& trace) {
  write_atomically(path, format_trace(trace));
}

/// Text model file, one "key value..." record per line after the version tag.
struct ModelFile {
  static constexpr int kVersion = 1;

  std::string task = "erm";
  std::size_t dim = 0;
  std::size_t classes = 1;
  std::string loss = "squared";
  double loss_parameter = 0.0;
  std::string regularizer = "l2";
  double threshold = 0.0;
  double lambda = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  int option = 0;
  std::vector<double> weights;
  std::optional<DualMatrix> alpha;      // generic runs
  std::vector<double> conj;             // structured runs: D_i
  std::optional<CostMatrix> cost;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

inline std::string format_model(const ModelFile& m) {
  std::ostringstream out;
  out << "proxsdca-model " << ModelFile::kVersion << '\n';
  out << "task " << m.task << '\n';
  out << "dim " << m.dim << '\n';
  out << "classes " << m.classes << '\n';
  out << "loss " << m.loss << ' ' << format_double(m.loss_parameter) << '\n';
  out << "regularizer " << m.regularizer << ' ' << format_double(m.threshold) << '\n';
  out << "lambda " << format_double(m.lambda) << '\n';
  out << "sigma " << format_double(m.sigma) << '\n';
  out << "seed " << m.seed << '\n';
  out << "option " << m.option << '\n';
  out << "primal " << format_double(m.primal) << '\n';
  out << "dual " << format_double(m.dual) << '\n';
  out << "gap " << format_double(m.gap) << '\n';
  out << "iterations " << m.iterations << '\n';
  std::size_t nnz = 0;
  for (double x : m.weights) nnz += x != 0.0;
  out << "weights " << m.weights.size() << ' ' << nnz << '\n';
  for (std::size_t f = 0; f < m.weights.size(); ++f)
    if (m.weights[f] != 0.0) out << f << ' ' << format_double(m.weights[f]) << '\n';
  if (m.alpha) {
    out << "alpha " << m.alpha->arity() << ' ' << m.alpha->size() << '\n';
    for (std::size_t i = 0; i < m.alpha->size(); ++i) {
      const auto col = m.alpha->column(i);
      for (std::size_t j = 0; j < col.size(); ++j) out << (j ? " " : "") << format_double(col[j]);
      out << '\n';
    }
  }
  if (!m.conj.empty()) {
    out << "conj " << m.conj.size() << '\n';
    for (double x : m.conj) out << format_double(x) << '\n';
  }
  if (m.cost) {
    const auto k = m.cost->classes();
    out << "cost " << k << '\n';
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t y = 0; y < k; ++y) out << (y ? " " : "") << format_double((*m.cost)(j, y));
      out << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

inline ModelFile parse_model(std::istream& in) {
  ModelFile m;
  std::string raw;
  std::size_t line_no = 0;
  auto next = [&]() -> std::vector<std::string_view> {
    while (std::getline(in, raw)) {
      ++line_no;
      auto tokens = detail::split_ws(raw);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError(line_no, "unexpected end of model file");
  };
  auto num = [&](std::string_view s) {
    const auto v = parse_double(s);
    if (!v) throw ParseError(line_no, "bad number '" + std::string(s) + "'");
    return *v;
  };
  auto count = [&](std::string_view s) {
    const auto v = parse_unsigned(s);
    if (!v) throw ParseError(line_no, "bad count '" + std::string(s) + "'");
    return static_cast<std::size_t>(*v);
  };
  auto expect = [&](const std::vector<std::string_view>& t, std::size_t arity) {
    if (t.size() != arity) throw ParseError(line_no, "malformed '" + std::string(t[0]) + "' record");
  };

  auto head = next();
  if (head.size() != 2 || head[0] != "proxsdca-model") throw ParseError(line_no, "not a model file");
  if (count(head[1]) != static_cast<std::size_t>(ModelFile::kVersion))
    throw ParseError(line_no, "unsupported model version " + std::string(head[1]));
  for (;;) {
    const auto t = next();
    const auto key = t[0];
    if (key == "end") break;
    if (key == "task") { expect(t, 2); m.task = std::string(t[1]); }
    else if (key == "dim") { expect(t, 2); m.dim = count(t[1]); }
    else if (key == "classes") { expect(t, 2); m.classes = count(t[1]); }
    else if (key == "loss") { expect(t, 3); m.loss = std::string(t[1]); m.loss_parameter = num(t[2]); }
    else if (key == "regularizer") { expect(t, 3); m.regularizer = std::string(t[1]); m.threshold = num(t[2]); }
    else if (key == "lambda") { expect(t, 2); m.lambda = num(t[1]); }
    else if (key == "sigma") { expect(t, 2); m.sigma = num(t[1]); }
    else if (key == "seed") { expect(t, 2); m.seed = count(t[1]); }
    else if (key == "option") { expect(t, 2); m.option = static_cast<int>(count(t[1])); }
    else if (key == "primal") { expect(t, 2); m.primal = num(t[1]); }
    else if (key == "dual") { expect(t, 2); m.dual = num(t[1]); }
    else if (key == "gap") { expect(t, 2); m.gap = num(t[1]); }
    else if (key == "iterations") { expect(t, 2); m.iterations = count(t[1]); }
    else if (key == "weights") {
      expect(t, 3);
      m.weights.assign(count(t[1]), 0.0);
      const std::size_t nnz = count(t[2]);
      for (std::size_t p = 0; p < nnz; ++p) {
        const auto e = next();
        expect(e, 2);
        const auto f = count(e[0]);
        if (f >= m.weights.size()) throw ParseError(line_no, "weight index out of range");
        m.weights[f] = num(e[1]);
      }
    } else if (key == "alpha") {
      expect(t, 3);
      DualMatrix a(count(t[1]), count(t[2]));
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto e = next();
        expect(e, a.arity());
        auto col = a.column(i);
        for (std::size_t j = 0; j < col.size(); ++j) col[j] = num(e[j]);
      }
      m.alpha = std::move(a);
    } else if (key == "conj") {
      expect(t, 2);
      m.conj.resize(count(t[1]));
      for (double& x : m.conj) {
        const auto e = next();
        expect(e, 1);
        x = num(e[0]);
      }
    } else if (key == "cost") {
      expect(t, 2);
      const std::size_t k = count(t[1]);
      std::vector<double> flat;
      for (std::size_t j = 0; j < k; ++j) {
        const auto e = next();
        expect(e, k);
        for (auto tok : e) flat.push_back(num(tok));
      }
      try {
        m.cost = CostMatrix(k, std::move(flat));
      } catch (const Error& e) {
        throw ParseError(line_no, e.what());
      }
    } else {
      throw ParseError(line_no, "unknown record '" + std::string(key) + "'");
    }
  }
  return m;
}

inline void write_model(const std::filesystem::path& path, const ModelFile& model) {
  write_atomically(path, format_model(model));
}

inline ModelFile read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_model(in);
}

inline Loss make_loss(const std::string& name, double parameter = 1.0, const CostMatrix* cost = nullptr) {
  if (name == "hinge") return Loss::hinge();
  if (name == "smoothed-hinge") return Loss::smoothed_hinge(parameter);
  if (name == "logistic") return Loss::logistic();
  if (name == "squared") return Loss::squared();
  if (name == "multiclass") {
    if (!cost) throw ConfigError("the multiclass loss needs a cost matrix");
    return Loss::multiclass(*cost);
  }
  throw ConfigError("unknown loss '" + name + "'");
}

inline Regularizer make_regularizer(const std::string& name, double threshold, std::size_t dim) {
  if (name == "l2") return Regularizer::l2();
  if (name == "l1l2") return Regularizer::l1l2(threshold);
  if (name == "l1qnorm") return Regularizer::l1qnorm(dim, threshold);
  throw ConfigError("unknown regularizer '" + name + "'");
}

}  // namespace proxsdca::io
