#include "noisegate/cli.hpp"

#include "noisegate/dataset.hpp"
#include "noisegate/errors.hpp"
#include "noisegate/serialize.hpp"
#include "noisegate/simlab.hpp"
#include "noisegate/stepper.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace noisegate {
namespace {

using nlohmann::json;

// Thrown for flag combinations that parse but cannot be run.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunRequest {
  std::string data_path;
  std::string manifest_path;
  std::string method = "l2";
  std::string rho = "logcosh";
  double alpha = 0.05;
  double c = 1.0;
  bool intercept = true;
  bool standardize = false;
  std::optional<std::size_t> max_steps;
  std::optional<double> sigma;
  std::string format = "table";
  std::string perturb;
  std::string experiment = "null";
  std::size_t n = 100;
  std::size_t k = 20;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  CLI::Option* intercept_opt = nullptr;
  CLI::Option* standardize_opt = nullptr;
};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

void add_gate_flags(CLI::App& sub, RunRequest& req) {
  sub.add_option("--data", req.data_path, "CSV file")->required();
  sub.add_option("--manifest", req.manifest_path, "manifest file (default: data path with .manifest)");
  sub.add_option("--method", req.method, "l2 or m")->check(CLI::IsMember({"l2", "m"}));
  sub.add_option("--alpha", req.alpha, "gate level in (0, 1)");
  sub.add_option("--c", req.c, "rho tuning constant");
  sub.add_option("--rho", req.rho, "logcosh or huber")->check(CLI::IsMember({"logcosh", "huber"}));
  sub.add_flag("--intercept,!--no-intercept", req.intercept, "fit an intercept");
  sub.add_flag("--standardize,!--no-standardize", req.standardize, "standardize covariates first");
  sub.add_option("--max-steps", req.max_steps, "stop after this many evaluations");
  sub.add_option("--sigma", req.sigma, "fixed M scale (debugging)");
  sub.add_option("--format", req.format, "table or json")->check(CLI::IsMember({"table", "json"}));
}

struct LoadedData {
  Dataset dataset;
  GateConfig config;
};

GateConfig gate_config(const RunRequest& req, const DatasetManifest* manifest) {
  GateConfig config;
  try {
    config.alpha = req.alpha;
    config.method = method_from_string(req.method);
    config.rho = RhoFunction{rho_family_from_string(req.rho), req.c};
    config.intercept = req.intercept;
    config.standardize = req.standardize;
    if (manifest != nullptr) {
      if (req.intercept_opt->count() == 0 && manifest->intercept) config.intercept = *manifest->intercept;
      if (req.standardize_opt->count() == 0 && manifest->standardize) config.standardize = *manifest->standardize;
    }
    config.max_steps = req.max_steps;
    config.fixed_sigma = req.sigma;
    config.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return config;
}

void validate_request(const RunRequest& req) {
  // Run before reading any file so bad flags fail as usage errors.
  gate_config(req, nullptr);
}

LoadedData load(const RunRequest& req) {
  validate_request(req);
  std::filesystem::path manifest_path = req.manifest_path;
  if (manifest_path.empty()) manifest_path = std::filesystem::path(req.data_path).replace_extension(".manifest");
  const DatasetManifest manifest = load_manifest(manifest_path);
  LoadedData loaded{load_csv(req.data_path, manifest), gate_config(req, &manifest)};
  return loaded;
}

void render_trace(std::ostream& out, const Dataset& dataset, const StepTrace& trace) {
  const auto& cfg = trace.config;
  out << "dataset: " << dataset.name() << "  method: " << to_string(cfg.method) << "  alpha: " << cfg.alpha
      << "  intercept: " << (cfg.intercept ? "yes" : "no") << "  standardize: " << (cfg.standardize ? "yes" : "no")
      << '\n';
  std::size_t width = 11;
  for (const auto& ev : trace.evaluations) width = std::max(width, ev.chosen_covariate.size() + 2);
  out << pad("step", 6) << pad("index", 7) << pad("covariate", width) << pad("P-value", 10) << "included\n";
  for (const auto& ev : trace.evaluations) {
    out << pad(std::to_string(ev.step_index), 6) << pad(std::to_string(ev.chosen_column + 1), 7)
        << pad(ev.chosen_covariate, width) << pad(fixed(ev.p_value), 10) << (ev.included ? "yes" : "no") << '\n';
  }
  out << "selected:";
  for (std::size_t i = 0; i < trace.selected.size(); ++i) out << (i == 0 ? " " : ", ") << trace.selected[i];
  out << "\ntermination: " << to_string(trace.termination_reason) << '\n';
}

std::pair<std::size_t, double> parse_perturbation(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw UsageError("--perturb expects INDEX=VALUE");
  std::size_t index = 0;
  double value = 0.0;
  const std::string lhs = spec.substr(0, eq);
  const std::string rhs = spec.substr(eq + 1);
  const auto r1 = std::from_chars(lhs.data(), lhs.data() + lhs.size(), index);
  const auto r2 = std::from_chars(rhs.data(), rhs.data() + rhs.size(), value);
  if (r1.ec != std::errc() || r1.ptr != lhs.data() + lhs.size() || r2.ec != std::errc() ||
      r2.ptr != rhs.data() + rhs.size())
    throw UsageError("--perturb expects INDEX=VALUE, got '" + spec + "'");
  if (index < 1) throw UsageError("--perturb index is 1-based");
  return {index, value};
}

int cmd_trace(const RunRequest& req, bool exhaustive, std::ostream& out) {
  LoadedData loaded = load(req);
  loaded.config.exhaustive = exhaustive;
  const StepTrace trace = run_stepwise(loaded.dataset, loaded.config);
  if (req.format == "json") {
    out << json(trace).dump(2) << '\n';
  } else {
    render_trace(out, loaded.dataset, trace);
  }
  return kExitOk;
}

int cmd_perturb(const RunRequest& req, std::ostream& out) {
  const auto [index, value] = parse_perturbation(req.perturb);
  LoadedData loaded = load(req);
  loaded.config.exhaustive = true;
  const Dataset perturbed = perturb_response(loaded.dataset, index, value);
  const StepTrace before = run_stepwise(loaded.dataset, loaded.config);
  const StepTrace after = run_stepwise(perturbed, loaded.config);

  json diff = json::array();
  const std::size_t steps = std::max(before.evaluations.size(), after.evaluations.size());
  for (std::size_t s = 0; s < steps; ++s) {
    const std::string b = s < before.evaluations.size() ? before.evaluations[s].chosen_covariate : "";
    const std::string a = s < after.evaluations.size() ? after.evaluations[s].chosen_covariate : "";
    if (a != b) diff.push_back(json{{"step", s + 1}, {"before", b}, {"after", a}});
  }

  if (req.format == "json") {
    out << json{{"perturbation", {{"index", index}, {"value", value}}},
                {"before", before},
                {"after", after},
                {"order_diff", diff}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  out << "== before ==\n";
  render_trace(out, loaded.dataset, before);
  out << "\n== after: y(" << index << ") = " << value << " ==\n";
  render_trace(out, perturbed, after);
  out << "\norder changes:";
  if (diff.empty()) out << " none";
  out << '\n';
  for (const auto& d : diff)
    out << "  step " << d["step"].get<std::size_t>() << ": " << d["before"].get<std::string>() << " -> "
        << d["after"].get<std::string>() << '\n';
  return kExitOk;
}

int cmd_simulate(const RunRequest& req, std::ostream& out) {
  SimConfig config;
  try {
    config.n = req.n;
    config.k = req.k;
    config.replications = req.reps;
    config.alpha = req.alpha;
    config.seed = req.seed;
    config.method = method_from_string(req.method);
    config.rho = RhoFunction{rho_family_from_string(req.rho), req.c};
    config.threads = req.threads;
    if (req.experiment == "null") {
      config.validate();
    } else {
      SimConfig intercept_only = config;
      intercept_only.k = 1;
      intercept_only.validate();
    }
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  SimReport report;
  if (req.experiment == "null") {
    report = null_calibration(config);
  } else {
    const RealMatrix ones = RealMatrix::Ones(static_cast<Eigen::Index>(config.n), 1);
    report = noise_reduction_distribution(config, ones);
  }

  if (req.format == "json") {
    out << json(report).dump(2) << '\n';
    return kExitOk;
  }
  out << "experiment: " << report.experiment << '\n'
      << "replications: " << report.replication_count << '\n'
      << "inclusion_rate: " << fixed(report.inclusion_rate) << '\n'
      << "ks_distance_chisq: " << fixed(report.ks_distance_chisq) << '\n'
      << "p-value histogram:\n";
  const double width = 1.0 / static_cast<double>(report.p_value_histogram.size());
  for (std::size_t b = 0; b < report.p_value_histogram.size(); ++b)
    out << "  [" << fixed(width * static_cast<double>(b), 2) << ", " << fixed(width * static_cast<double>(b + 1), 2)
        << ")  " << report.p_value_histogram[b] << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forward stepwise regression gated against random noise covariates", "noisegate"};
  app.require_subcommand(1);
  RunRequest req;

  auto* select = app.add_subcommand("select", "select covariates until the gate fails");
  add_gate_flags(*select, req);
  auto* rank = app.add_subcommand("rank", "order every covariate with its P-value");
  add_gate_flags(*rank, req);
  auto* perturb = app.add_subcommand("perturb", "compare rankings before and after changing one response");
  add_gate_flags(*perturb, req);
  perturb->add_option("--perturb", req.perturb, "INDEX=VALUE, 1-based")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo checks under pure noise");
  simulate->add_option("--experiment", req.experiment, "null or noise")->check(CLI::IsMember({"null", "noise"}));
  simulate->add_option("--n", req.n, "observations");
  simulate->add_option("--k", req.k, "noise covariates (null experiment)");
  simulate->add_option("--reps", req.reps, "replications");
  simulate->add_option("--alpha", req.alpha, "gate level in (0, 1)");
  simulate->add_option("--seed", req.seed, "random seed");
  simulate->add_option("--method", req.method, "l2 or m")->check(CLI::IsMember({"l2", "m"}));
  simulate->add_option("--c", req.c, "rho tuning constant");
  simulate->add_option("--rho", req.rho, "logcosh or huber")->check(CLI::IsMember({"logcosh", "huber"}));
  simulate->add_option("--threads", req.threads, "worker threads, 0 for all cores");
  simulate->add_option("--format", req.format, "table or json")->check(CLI::IsMember({"table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (CLI::App* sub : {select, rank, perturb}) {
    if (sub->parsed()) {
      req.intercept_opt = sub->get_option("--intercept");
      req.standardize_opt = sub->get_option("--standardize");
    }
  }

  try {
    if (select->parsed()) return cmd_trace(req, false, out);
    if (rank->parsed()) return cmd_trace(req, true, out);
    if (perturb->parsed()) return cmd_perturb(req, out);
    return cmd_simulate(req, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return kExitComputation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputation;
  }
}

}  // namespace noisegate
