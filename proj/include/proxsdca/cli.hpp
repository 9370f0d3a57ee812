#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "proxsdca/error.hpp"
#include "proxsdca/io.hpp"
#include "proxsdca/l1.hpp"
#include "proxsdca/problem.hpp"
#include "proxsdca/schedule.hpp"
#include "proxsdca/solver.hpp"
#include "proxsdca/structured.hpp"

namespace proxsdca::cli {

inline constexpr int kExitReached = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCapped = 2;

inline constexpr const char* kSeedEnv = "PROXSDCA_SEED";

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv)) {
    if (auto v = io::parse_unsigned(env)) return *v;
  }
  return 1;
}

struct GapAudit {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  bool consistent = true;  // stored values match the recomputation within 1e-6
  std::string method;
};

/// Recomputes P, D and the gap of a stored model against a dataset.
///
/// Generic models use the stored alpha; structured models use the stored D_i with
/// D = -(1/n) sum D_i - lambda/2 ||w||^2.
inline GapAudit gap_report(const io::ModelFile& model, std::shared_ptr<const Dataset> data) {
  GapAudit a;
  if (model.task == "struct") {
    if (!model.cost) throw ConfigError("structured model has no cost matrix");
    MulticlassOracle oracle(*model.cost, data);
    if (model.conj.size() != oracle.size()) throw ConfigError("model was trained on a different example count");
    if (model.weights.size() != oracle.dim()) throw ConfigError("model dimension does not match the data");
    double loss_sum = 0.0, conj_sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      loss_sum += oracle.decode(model.weights, i).loss;
      conj_sum += model.conj[i];
    }
    for (double x : model.weights) sq += x * x;
    const auto n = static_cast<double>(oracle.size());
    a.primal = loss_sum / n + 0.5 * model.lambda * sq;
    a.dual = -conj_sum / n - 0.5 * model.lambda * sq;
    a.method = "maintained D_i decomposition";
  } else {
    if (!model.alpha) throw ConfigError("model has no dual variables");
    Problem problem(data, io::make_loss(model.loss, model.loss_parameter, model.cost ? &*model.cost : nullptr),
                    io::make_regularizer(model.regularizer, model.threshold, data->dim()), model.lambda);
    if (model.weights.size() != problem.d()) throw ConfigError("model dimension does not match the data");
    if (model.alpha->size() != problem.n() || model.alpha->arity() != problem.k())
      throw ConfigError("model dual variables do not match the data");
    const auto r = gap_at(problem, model.weights, *model.alpha);
    a.primal = r.primal;
    a.dual = r.dual;
    a.method = "stored dual variables";
  }
  a.gap = a.primal - a.dual;
  const double tol = 1e-6;
  a.consistent = std::abs(a.primal - model.primal) <= tol && std::abs(a.dual - model.dual) <= tol &&
                 std::abs(a.gap - model.gap) <= tol;
  return a;
}

namespace detail {

inline int parse_args(CLI::App& app, std::vector<std::string> args, std::ostream& out, std::ostream& err,
                      bool& done) {
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    done = true;
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    done = true;
    return kExitError;
  }
  done = false;
  return 0;
}

inline UpdateOption to_option(int value) {
  if (value < 1 || value > 5) throw ConfigError("--option must be 1..5");
  return static_cast<UpdateOption>(value);
}

inline OutputMode to_output(const std::string& s) {
  if (s == "final") return OutputMode::final;
  if (s == "average") return OutputMode::average;
  if (s == "random") return OutputMode::random;
  throw ConfigError("--output must be final, average or random");
}

}  // namespace detail

/// `train` command. Exit codes: 0 when the gap target is met (or none was set),
/// 2 when the iteration cap is hit first, 1 on any error.
inline int train_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train a model with Prox-SDCA", "train"};
  std::string task = "erm", data_path, loss_name = "smoothed-hinge", reg_name = "l2", output_name;
  std::string model_path, trace_path, cost_path;
  double gamma = 1.0, tau = 0.0;
  std::optional<double> lambda, sigma, eps, bound, z_bound;
  std::optional<std::size_t> dim, iterations, burn_in;
  std::size_t gap_every = 0;
  int option = 3;
  std::uint64_t seed = default_seed();

  app.add_option("--task", task, "erm, l1l2, l1linf or struct")
      ->check(CLI::IsMember({"erm", "l1l2", "l1linf", "struct"}));
  app.add_option("--data", data_path, "svmlight training file")->required();
  app.add_option("--dim", dim, "feature count (default: max index)");
  app.add_option("--loss", loss_name, "hinge, smoothed-hinge, logistic or squared")
      ->check(CLI::IsMember({"hinge", "smoothed-hinge", "logistic", "squared"}));
  app.add_option("--gamma", gamma, "smoothed hinge parameter");
  app.add_option("--reg", reg_name, "erm regularizer: l2, l1l2 or l1qnorm")
      ->check(CLI::IsMember({"l2", "l1l2", "l1qnorm"}));
  app.add_option("--tau", tau, "l1 weight of the erm regularizer, relative to lambda");
  app.add_option("--option", option, "update option 1..5");
  app.add_option("--lambda", lambda, "regularization (erm, struct)");
  app.add_option("--sigma", sigma, "l1 regularization (l1l2, l1linf)");
  app.add_option("--eps", eps, "target duality gap / accuracy");
  app.add_option("--B", bound, "norm bound on the l1 solution (default 1/sigma)");
  app.add_option("--seed", seed, std::string("random seed (default $") + kSeedEnv + " or 1)");
  app.add_option("--T", iterations, "iteration cap (default: rate schedule)");
  app.add_option("--T0", burn_in, "burn-in before output selection");
  app.add_option("--gap-every", gap_every, "iterations between gap checkpoints (default n)");
  app.add_option("--output", output_name, "final, average or random");
  app.add_option("--z-bound", z_bound, "Option IV bound on ||u - alpha_i||_D^2");
  app.add_option("--out", model_path, "model file to write");
  app.add_option("--trace", trace_path, "trace CSV to write");
  app.add_option("--cost-matrix", cost_path, "k x k cost matrix (struct; default 0/1)");

  bool done = false;
  const int code = detail::parse_args(app, args, out, err, done);
  if (done) return code;

  try {
    io::ModelFile model;
    model.task = task;
    model.seed = seed;
    model.option = option;
    RunTrace trace;
    bool success = true;

    if (task == "struct") {
      if (!lambda) throw ConfigError("--lambda is required for struct");
      if (!eps) throw ConfigError("--eps is required for struct");
      io::SvmlightOptions opt{dim, true, std::nullopt};
      std::optional<CostMatrix> cost;
      if (!cost_path.empty()) {
        cost = io::read_cost_matrix(cost_path);
        opt.classes = cost->classes();
      }
      auto data = std::make_shared<const Dataset>(io::read_svmlight(data_path, opt));
      if (!cost) {
        cost = CostMatrix::zero_one(data->arity());
        out << "cost matrix: 0/1\n";
      }
      MulticlassOracle oracle(*cost, data);
      StructuredConfig sc;
      sc.eps = *eps;
      sc.seed = seed;
      sc.gap_check_every = gap_every;
      sc.target_gap = *eps;
      if (iterations) {
        sc.iterations = *iterations;
        sc.burn_in = burn_in.value_or(0);
      }
      const auto result = train_structured(oracle, *lambda, sc);
      out << "T = " << result.iterations << ", T0 = " << result.burn_in << '\n';
      model.dim = oracle.dim();
      model.classes = oracle.classes();
      model.loss = "multiclass";
      model.lambda = *lambda;
      model.weights = result.weights;
      model.conj = result.output_conj;
      model.cost = *cost;
      model.primal = result.output_gap.primal;
      model.dual = result.output_gap.dual;
      model.gap = result.output_gap.gap;
      model.iterations = result.iterations;
      trace = result.trace;
      success = model.gap <= *eps;
    } else {
      auto data = std::make_shared<const Dataset>(io::read_svmlight(data_path, {dim, false, std::nullopt}));
      const Loss loss = io::make_loss(loss_name, gamma);
      check_option_supported(loss, detail::to_option(option));
      model.loss = loss_name;
      model.loss_parameter = loss.kind() == LossKind::smoothed_hinge ? gamma : 0.0;
      model.dim = data->dim();

      if (task == "erm") {
        if (!lambda) throw ConfigError("--lambda is required for erm");
        Problem problem(data, loss, io::make_regularizer(reg_name, tau, data->dim()), *lambda);
        for (const auto& w : problem.warnings()) err << "warning: " << w << '\n';
        SolverConfig sc;
        sc.option = detail::to_option(option);
        sc.seed = seed;
        sc.gap_check_every = gap_every;
        sc.z_bound = z_bound;
        sc.target_gap = eps;
        const auto gamma_s = loss.smoothness_gamma();
        if (iterations) {
          sc.iterations = *iterations;
          sc.burn_in = burn_in.value_or(0);
          sc.output = OutputMode::final;
        } else {
          if (!eps) throw ConfigError("--eps or --T is required");
          if (gamma_s) {
            sc.iterations = schedule_smooth(problem.n(), problem.radius(), *lambda, *gamma_s, *eps);
            sc.output = OutputMode::final;
          } else {
            const auto s = schedule_lipschitz(problem.n(), problem.radius(), *loss.lipschitz(), *lambda, *eps);
            sc.iterations = s.iterations;
            sc.burn_in = s.burn_in;
            sc.output = OutputMode::random;
          }
          if (burn_in) sc.burn_in = *burn_in;
        }
        if (!output_name.empty()) sc.output = detail::to_output(output_name);
        out << "T = " << sc.iterations << ", T0 = " << sc.burn_in << ", output = " << to_string(sc.output) << '\n';
        const auto result = run(problem, sc);
        model.regularizer = reg_name;
        model.threshold = tau;
        model.lambda = *lambda;
        model.weights = result.weights;
        model.alpha = result.alpha;
        model.primal = result.output_gap.primal;
        model.dual = result.output_gap.dual;
        model.gap = result.output_gap.gap;
        model.iterations = result.iterations;
        trace = result.trace;
        success = !eps || model.gap <= *eps;
      } else {
        if (!sigma) throw ConfigError("--sigma is required for " + task);
        if (!eps) throw ConfigError("--eps is required for " + task);
        L1Config lc;
        lc.sigma = *sigma;
        lc.eps = *eps;
        lc.bound = bound;
        lc.option = detail::to_option(option);
        lc.seed = seed;
        lc.gap_check_every = gap_every;
        const bool linf = task == "l1linf";
        lc.variant = linf ? L1Variant::linf_instances : L1Variant::l2_instances;
        const auto result = solve_l1(data, loss, lc);
        if (linf)
          out << "lambda = eps/(3 ln(d) B^2) = " << io::format_double(result.lambda) << '\n';
        else
          out << "lambda = eps/B^2 = " << io::format_double(result.lambda) << '\n';
        out << "B = " << io::format_double(result.bound) << ", sigma/lambda = " << io::format_double(result.threshold)
            << ", cap T = " << result.iteration_cap << '\n';
        for (const auto& w : result.warnings) err << "warning: " << w << '\n';
        model.regularizer = linf ? "l1qnorm" : "l1l2";
        model.threshold = result.threshold;
        model.lambda = result.lambda;
        model.sigma = *sigma;
        model.weights = result.weights;
        model.alpha = result.run.alpha;
        model.primal = result.run.output_gap.primal;
        model.dual = result.run.output_gap.dual;
        model.gap = result.run.output_gap.gap;
        model.iterations = result.run.iterations;
        trace = result.run.trace;
        success = result.reached_target();
      }
    }

    out << "P = " << io::format_double(model.primal) << ", D = " << io::format_double(model.dual)
        << ", gap = " << io::format_double(model.gap) << ", iterations = " << model.iterations << '\n';
    if (!model_path.empty()) io::write_model(model_path, model);
    if (!trace_path.empty()) io::write_trace(trace_path, trace);
    if (!success) err << "iteration cap reached before the target gap\n";
    return success ? kExitReached : kExitCapped;
  } catch (const UnsupportedOption& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

/// `gap` command: recomputes the certificate of a stored model.
/// Exit codes: 0 when the stored values check out, 2 on an integrity warning, 1 on error.
inline int gap_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recompute the duality gap of a model", "gap"};
  std::string model_path, data_path;
  std::optional<std::size_t> dim;
  app.add_option("--model", model_path, "model file")->required();
  app.add_option("--data", data_path, "svmlight data file")->required();
  app.add_option("--dim", dim, "feature count");
  bool done = false;
  const int code = detail::parse_args(app, args, out, err, done);
  if (done) return code;
  try {
    const auto model = io::read_model(model_path);
    io::SvmlightOptions opt;
    opt.dim = dim;
    if (model.task == "struct") {
      opt.multiclass = true;
      opt.classes = model.classes;
      if (!dim && model.classes > 0) opt.dim = model.dim / model.classes;
    } else if (!dim) {
      opt.dim = model.dim;
    }
    auto data = std::make_shared<const Dataset>(io::read_svmlight(data_path, opt));
    const auto a = gap_report(model, data);
    out << "recomputed (" << a.method << "): P = " << io::format_double(a.primal)
        << ", D = " << io::format_double(a.dual) << ", gap = " << io::format_double(a.gap) << '\n';
    out << "stored: P = " << io::format_double(model.primal) << ", D = " << io::format_double(model.dual)
        << ", gap = " << io::format_double(model.gap) << '\n';
    if (!a.consistent) {
      err << "integrity warning: stored values differ from the recomputation by more than 1e-6\n";
      return kExitCapped;
    }
    return kExitReached;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

inline int main_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::string usage = "usage: proxsdca {train|gap} [options]; see <command> --help\n";
  if (args.empty()) {
    err << usage;
    return kExitError;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  if (args[0] == "train") return train_command(rest, out, err);
  if (args[0] == "gap") return gap_command(rest, out, err);
  if (args[0] == "--help" || args[0] == "-h") {
    out << usage;
    return 0;
  }
  err << usage;
  return kExitError;
}

}  // namespace proxsdca::cli
