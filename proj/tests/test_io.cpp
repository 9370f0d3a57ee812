#include <gtest/gtest.h>
#include <sys/wait.h>

#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "proxsdca/cli.hpp"
#include "proxsdca/io.hpp"
#include "support.hpp"

using namespace proxsdca;
using testing_support::Gen;
namespace fs = std::filesystem;

namespace {

Dataset parse(const std::string& text, const io::SvmlightOptions& opt = {}) {
  std::istringstream in(text);
  return io::parse_svmlight(in, opt);
}

std::size_t parse_error_line(const std::string& text, const io::SvmlightOptions& opt = {}) {
  try {
    parse(text, opt);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class Scratch {
 public:
  Scratch() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("proxsdca_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
};

struct Outcome {
  int code = -1;
  std::string out, err;
};

Outcome run_cli(const Scratch& s, const std::string& args, const std::string& env = "") {
  const auto out = s / "stdout.txt", err = s / "stderr.txt";
  const std::string cmd = env + " \"" PROXSDCA_CLI_PATH "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

void write_binary_data(const fs::path& p, std::uint64_t seed, std::size_t n = 60, std::size_t d = 8) {
  Gen g(seed);
  auto data = testing_support::scalar_dataset(g, Loss::hinge(), n, d);
  std::ofstream out(p);
  io::write_svmlight(out, *data);
}

void write_multiclass_data(const fs::path& p, std::uint64_t seed) {
  Gen g(seed);
  auto data = testing_support::multiclass_dataset(g, 3, 50, 4);
  std::ofstream out(p);
  io::write_svmlight(out, *data);
}

// Trace rows with the wall-clock column dropped.
std::vector<std::string> trace_without_seconds(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

}  // namespace

TEST(Svmlight, ParsesBasicLine) {
  const auto d = parse("+1 3:0.5 7:1.25\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.dim(), 7u);
  EXPECT_EQ(d.label(0), 1.0);
  const std::vector<SparseEntry> expected{{2, 0.5}, {6, 1.25}};
  EXPECT_EQ(d.example(0).columns[0].entries(), expected);
}

TEST(Svmlight, RejectsDecreasingIndices) {
  EXPECT_THROW(parse("1 5:2 3:1\n"), ParseError);
  EXPECT_EQ(parse_error_line("1 1:1\n-1 2:1\n\n1 5:2 3:1\n"), 4u);
  EXPECT_EQ(parse_error_line("1 2:1 2:3\n"), 1u);
}

TEST(Svmlight, EmptyFeatureListIsZeroVector) {
  const auto d = parse("-1\n1 2:1\n");
  EXPECT_EQ(d.example(0).columns[0].nnz(), 0u);
  EXPECT_EQ(d.label(0), -1.0);
  EXPECT_EQ(d.dim(), 2u);
}

TEST(Svmlight, CommentsAndBlankLines) {
  const auto d = parse("# header\n\n1 1:2 # trailing\n  \n-1 2:3\n");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.example(1).columns[0].entries().front().index, 1u);
}

TEST(Svmlight, MalformedTokensReportLine) {
  EXPECT_EQ(parse_error_line("1 1:1\nabc 1:1\n"), 2u);
  EXPECT_EQ(parse_error_line("1 1:1\n1 1-1\n"), 2u);
  EXPECT_EQ(parse_error_line("1 0:1\n"), 1u);
  EXPECT_EQ(parse_error_line("1 x:1\n"), 1u);
  EXPECT_EQ(parse_error_line("1 1:y\n"), 1u);
  EXPECT_EQ(parse_error_line("1 1:1\n1 1:nan\n"), 2u);
  EXPECT_EQ(parse_error_line("1 1:inf\n"), 1u);
  EXPECT_EQ(parse_error_line("inf 1:1\n"), 1u);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Svmlight, ExplicitDimension) {
  io::SvmlightOptions opt;
  opt.dim = 10;
  EXPECT_EQ(parse("1 3:1\n", opt).dim(), 10u);
  opt.dim = 2;
  EXPECT_THROW(parse("1 3:1\n", opt), ParseError);
}

TEST(Svmlight, MulticlassMode) {
  io::SvmlightOptions opt;
  opt.multiclass = true;
  const auto d = parse("1 1:1\n3 2:2\n2 1:1 2:1\n", opt);
  EXPECT_EQ(d.arity(), 3u);
  EXPECT_EQ(d.dim(), 6u);
  EXPECT_EQ(d.label(1), 2.0);
  EXPECT_EQ(parse_error_line("1 1:1\n0 1:1\n", opt), 2u);
  EXPECT_EQ(parse_error_line("1 1:1\n1.5 1:1\n", opt), 2u);
  opt.classes = 2;
  EXPECT_EQ(parse_error_line("1 1:1\n\n3 1:1\n", opt), 3u);
  opt.classes.reset();
  EXPECT_THROW(parse("1 1:1\n", opt), ParseError);
}

TEST(Properties, SvmlightRoundTrip) {
  Gen g(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + g.index(40);
    auto data = testing_support::scalar_dataset(g, trial % 2 ? Loss::squared() : Loss::hinge(), 1 + g.index(50), d,
                                                g.uniform(0.05, 1.0), g.uniform(0.1, 100.0));
    std::stringstream s;
    io::write_svmlight(s, *data);
    io::SvmlightOptions opt;
    opt.dim = d;
    const auto back = io::parse_svmlight(s, opt);
    EXPECT_EQ(back.dim(), data->dim());
    EXPECT_EQ(back.labels(), data->labels());
    EXPECT_EQ(back.examples(), data->examples());
  }
}

TEST(Properties, MulticlassSvmlightRoundTrip) {
  Gen g(12);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t k = 2 + g.index(4), width = 1 + g.index(10);
    auto data = testing_support::multiclass_dataset(g, k, 1 + g.index(40), width);
    std::stringstream s;
    io::write_svmlight(s, *data);
    const auto back = io::parse_svmlight(s, {width, true, k});
    EXPECT_EQ(back.arity(), k);
    EXPECT_EQ(back.labels(), data->labels());
    EXPECT_EQ(back.examples(), data->examples());
  }
}

TEST(CostMatrixFile, ParsesAndValidates) {
  std::istringstream ok("0 1 2\n1 0 1\n# c\n2 1 0\n");
  const auto c = io::parse_cost_matrix(ok);
  EXPECT_EQ(c.classes(), 3u);
  EXPECT_EQ(c(0, 2), 2.0);
  std::istringstream ragged("0 1\n1 0 2\n");
  EXPECT_THROW(io::parse_cost_matrix(ragged), ParseError);
  std::istringstream diag("1 1\n1 0\n");
  EXPECT_THROW(io::parse_cost_matrix(diag), ParseError);
  std::istringstream wide("0 1 1\n1 0 1\n");
  EXPECT_THROW(io::parse_cost_matrix(wide), ParseError);
  std::istringstream negative("0 -1\n1 0\n");
  EXPECT_THROW(io::parse_cost_matrix(negative), ParseError);
}

TEST(FormatDouble, RoundTripsBitExactly) {
  Gen g(13);
  std::vector<double> xs{0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-310, std::numeric_limits<double>::max(),
                         std::numeric_limits<double>::min(), -2.5e-17};
  for (int t = 0; t < 2000; ++t) xs.push_back(g.normal() * std::pow(10.0, g.uniform(-300.0, 300.0)));
  for (double x : xs) {
    const auto back = io::parse_double(io::format_double(x));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(std::bit_cast<std::uint64_t>(*back), std::bit_cast<std::uint64_t>(x)) << io::format_double(x);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(Trace, CsvLayout) {
  RunTrace trace;
  trace.checkpoints.push_back({10, 1.5, 0.5, 1.0, 0.25});
  trace.checkpoints.push_back({20, 0.75, 0.5, 0.25, 0.5});
  EXPECT_EQ(io::format_trace(trace), "t,P,D,gap,seconds\n10,1.5,0.5,1,0.25\n20,0.75,0.5,0.25,0.5\n");
}

TEST(ModelFileFormat, RoundTripsBitExactly) {
  Gen g(14);
  for (int trial = 0; trial < 20; ++trial) {
    io::ModelFile m;
    m.task = trial % 2 ? "struct" : "erm";
    m.dim = 1 + g.index(30);
    m.classes = 1 + g.index(3);
    m.loss = "smoothed-hinge";
    m.loss_parameter = g.uniform(0.1, 2.0);
    m.regularizer = "l1l2";
    m.threshold = g.uniform();
    m.lambda = g.uniform(1e-6, 1.0);
    m.sigma = g.uniform();
    m.seed = g.index(1u << 30);
    m.option = 1 + static_cast<int>(g.index(5));
    m.weights = g.vec(m.dim);
    for (auto& w : m.weights)
      if (g.coin(0.3)) w = 0.0;
    m.primal = g.normal();
    m.dual = g.normal();
    m.gap = m.primal - m.dual;
    m.iterations = g.index(100000);
    if (trial % 2) {
      m.conj = g.vec(1 + g.index(10));
      m.cost = CostMatrix::zero_one(2 + g.index(3));
    } else {
      DualMatrix a(m.classes, 1 + g.index(10));
      for (std::size_t i = 0; i < a.size(); ++i)
        for (auto& x : a.column(i)) x = g.normal();
      m.alpha = std::move(a);
    }
    const auto text = io::format_model(m);
    std::istringstream in(text);
    const auto back = io::parse_model(in);
    EXPECT_EQ(io::format_model(back), text);
    ASSERT_EQ(back.weights.size(), m.weights.size());
    for (std::size_t f = 0; f < m.weights.size(); ++f)
      EXPECT_EQ(std::bit_cast<std::uint64_t>(back.weights[f]), std::bit_cast<std::uint64_t>(m.weights[f]));
    EXPECT_EQ(back.primal, m.primal);
    EXPECT_EQ(back.lambda, m.lambda);
  }
}

TEST(ModelFileFormat, RejectsMalformedFiles) {
  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(io::parse_model(in), ParseError) << text;
  };
  bad("");
  bad("something 1\nend\n");
  bad("proxsdca-model 99\nend\n");
  bad("proxsdca-model 1\nlambda\nend\n");
  bad("proxsdca-model 1\nweights 2 1\n5 1.0\nend\n");
  bad("proxsdca-model 1\nmystery 1\nend\n");
  bad("proxsdca-model 1\ndim 3\n");
}

TEST(WriteAtomically, ReplacesTarget) {
  Scratch s;
  const auto p = s / "f.txt";
  spit(p, "old");
  io::write_atomically(p, "new");
  EXPECT_EQ(slurp(p), "new");
  EXPECT_FALSE(fs::exists(s / "f.txt.tmp"));
}

TEST(GapReport, FreshModelMatchesStoredValues) {
  Gen g(15);
  auto data = testing_support::scalar_dataset(g, Loss::logistic(), 50, 6);
  Problem p(data, Loss::logistic(), Regularizer::l1l2(0.1), 0.05);
  SolverConfig c;
  c.iterations = 500;
  const auto r = run(p, c);
  io::ModelFile m;
  m.dim = 6;
  m.loss = "logistic";
  m.regularizer = "l1l2";
  m.threshold = 0.1;
  m.lambda = 0.05;
  m.weights = r.weights;
  m.alpha = r.alpha;
  m.primal = r.output_gap.primal;
  m.dual = r.output_gap.dual;
  m.gap = r.output_gap.gap;
  const auto a = cli::gap_report(m, data);
  EXPECT_TRUE(a.consistent);
  EXPECT_NEAR(a.gap, m.gap, 1e-9);
  m.weights[0] += 0.01;
  EXPECT_FALSE(cli::gap_report(m, data).consistent);
}

TEST(GapReport, StructuredUsesMaintainedConjugates) {
  Gen g(16);
  auto data = testing_support::multiclass_dataset(g, 3, 40, 4);
  const auto cost = CostMatrix::zero_one(3);
  MulticlassOracle oracle(cost, data);
  StructuredConfig sc;
  sc.eps = 0.1;
  sc.iterations = 400;
  const auto r = train_structured(oracle, 0.1, sc);
  io::ModelFile m;
  m.task = "struct";
  m.dim = oracle.dim();
  m.classes = 3;
  m.loss = "multiclass";
  m.lambda = 0.1;
  m.weights = r.weights;
  m.conj = r.output_conj;
  m.cost = cost;
  m.primal = r.output_gap.primal;
  m.dual = r.output_gap.dual;
  m.gap = r.output_gap.gap;
  const auto a = cli::gap_report(m, data);
  EXPECT_EQ(a.method, "maintained D_i decomposition");
  EXPECT_TRUE(a.consistent);
  EXPECT_NEAR(a.gap, m.gap, 1e-9);
  m.conj.pop_back();
  EXPECT_THROW(cli::gap_report(m, data), ConfigError);
}

TEST(Cli, UsageErrors) {
  Scratch s;
  EXPECT_EQ(run_cli(s, "").code, 1);
  EXPECT_EQ(run_cli(s, "frobnicate").code, 1);
  const auto missing = run_cli(s, "train --lambda 0.1");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("usage error"), std::string::npos);
  const auto unknown = run_cli(s, "train --data x --loss cubic");
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.err.find("usage error"), std::string::npos);
  EXPECT_EQ(run_cli(s, "--help").code, 0);
  EXPECT_EQ(run_cli(s, "train --help").code, 0);
}

TEST(Cli, OptionFiveNeedsSmoothLoss) {
  Scratch s;
  write_binary_data(s / "d.svm", 1);
  const auto o = run_cli(s, "train --data " + (s / "d.svm").string() + " --loss hinge --option 5 --lambda 0.1 --T 10");
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("usage error"), std::string::npos);
  EXPECT_NE(o.err.find("smooth losses only"), std::string::npos);
}

TEST(Cli, MissingDataFileIsAnError) {
  Scratch s;
  const auto o = run_cli(s, "train --data " + (s / "nope.svm").string() + " --lambda 0.1 --T 10");
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("cannot open"), std::string::npos);
}

TEST(Cli, ExitCodesForTargetAndCap) {
  Scratch s;
  write_binary_data(s / "d.svm", 2);
  const std::string base = "train --data " + (s / "d.svm").string() + " --loss smoothed-hinge --lambda 0.1";
  EXPECT_EQ(run_cli(s, base + " --eps 1e-3").code, 0);
  const auto capped = run_cli(s, base + " --eps 1e-12 --T 3");
  EXPECT_EQ(capped.code, 2);
  EXPECT_NE(capped.err.find("iteration cap"), std::string::npos);
  EXPECT_EQ(run_cli(s, base + " --T 30").code, 0);
}

TEST(Cli, L1TasksLogLambda) {
  Scratch s;
  write_binary_data(s / "d.svm", 3, 80, 12);
  const std::string base = "train --data " + (s / "d.svm").string() + " --loss smoothed-hinge --sigma 0.05 --eps 0.05 --B 4";
  const auto a = run_cli(s, base + " --task l1l2");
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("lambda = eps/B^2 = " + io::format_double(0.05 / 16.0)), std::string::npos) << a.out;
  const auto b = run_cli(s, base + " --task l1linf");
  EXPECT_EQ(b.code, 0) << b.err;
  EXPECT_NE(b.out.find("lambda = eps/(3 ln(d) B^2) = " + io::format_double(l1_linf_lambda(0.05, 4.0, 12))),
            std::string::npos)
      << b.out;
}

TEST(Cli, StructuredDefaultsToZeroOneCost) {
  Scratch s;
  write_multiclass_data(s / "m.svm", 4);
  const std::string base = "train --task struct --data " + (s / "m.svm").string() + " --lambda 0.1 --eps 0.1";
  const auto a = run_cli(s, base);
  EXPECT_NE(a.out.find("cost matrix: 0/1"), std::string::npos) << a.out;
  spit(s / "cost.txt", "0 1 1\n1 0 1\n1 1 0\n");
  const auto b = run_cli(s, base + " --cost-matrix " + (s / "cost.txt").string());
  EXPECT_EQ(b.out.find("cost matrix: 0/1"), std::string::npos);
  EXPECT_EQ(a.code, b.code);
}

TEST(Cli, GapCommandAndTamperDetection) {
  Scratch s;
  write_binary_data(s / "d.svm", 5);
  const auto model = s / "model.txt";
  const auto t = run_cli(s, "train --data " + (s / "d.svm").string() + " --loss logistic --reg l1l2 --tau 0.1 --lambda 0.05 --T 300 --out " +
                                model.string());
  ASSERT_EQ(t.code, 0) << t.err;
  const std::string gap = "gap --model " + model.string() + " --data " + (s / "d.svm").string();
  const auto fresh = run_cli(s, gap);
  EXPECT_EQ(fresh.code, 0) << fresh.err;
  EXPECT_NE(fresh.out.find("stored dual variables"), std::string::npos);

  auto text = slurp(model);
  const auto pos = text.find("\nprimal ");
  ASSERT_NE(pos, std::string::npos);
  text.insert(pos + 8, "1");
  spit(model, text);
  const auto tampered = run_cli(s, gap);
  EXPECT_EQ(tampered.code, 2);
  EXPECT_NE(tampered.err.find("integrity warning"), std::string::npos);
}

TEST(Cli, StructuredGapUsesMaintainedDecomposition) {
  Scratch s;
  write_multiclass_data(s / "m.svm", 6);
  const auto model = s / "model.txt";
  run_cli(s, "train --task struct --data " + (s / "m.svm").string() + " --lambda 0.1 --eps 0.1 --T 500 --out " +
                 model.string());
  ASSERT_TRUE(fs::exists(model));
  const auto o = run_cli(s, "gap --model " + model.string() + " --data " + (s / "m.svm").string());
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("maintained D_i decomposition"), std::string::npos);
}

TEST(Cli, TraceIsDeterministicGivenSeed) {
  Scratch s;
  write_binary_data(s / "d.svm", 7);
  const std::string base = "train --data " + (s / "d.svm").string() + " --loss hinge --option 4 --lambda 0.05 --T 600 --gap-every 60";
  ASSERT_EQ(run_cli(s, base + " --seed 9 --trace " + (s / "a.csv").string()).code, 0);
  ASSERT_EQ(run_cli(s, base + " --seed 9 --trace " + (s / "b.csv").string()).code, 0);
  ASSERT_EQ(run_cli(s, base + " --seed 10 --trace " + (s / "c.csv").string()).code, 0);
  ASSERT_EQ(run_cli(s, base + " --trace " + (s / "e.csv").string(), "PROXSDCA_SEED=9").code, 0);
  const auto a = trace_without_seconds(slurp(s / "a.csv"));
  EXPECT_EQ(a.front(), "t,P,D,gap");
  EXPECT_EQ(a.size(), 11u);
  EXPECT_EQ(a, trace_without_seconds(slurp(s / "b.csv")));
  EXPECT_EQ(a, trace_without_seconds(slurp(s / "e.csv")));
  EXPECT_NE(a, trace_without_seconds(slurp(s / "c.csv")));
}
