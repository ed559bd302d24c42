// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 4a ...   run only the named criteria
//
// Exit status is 0 only if every criterion that ran passed.

#include "noisegate/cli.hpp"
#include "noisegate/probdist.hpp"
#include "noisegate/robustrho.hpp"
#include "noisegate/serialize.hpp"
#include "noisegate/simlab.hpp"
#include "noisegate/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace noisegate;
using nlohmann::json;

namespace {

// Tolerances, fixed.
constexpr double kL2Tolerance = 0.005;
constexpr double kMTolerance = 0.02;
constexpr double kPerturbL2Tolerance = 0.01;
constexpr double kPerturbMTolerance = 0.02;
constexpr double kBirthTolerance = 0.01;
constexpr double kKsBound = 0.03;
constexpr double kRateLow = 0.02;
constexpr double kRateHigh = 0.09;
constexpr double kRoundTripTolerance = 1e-9;
constexpr double kDualityTolerance = 1e-8;
constexpr double kInvarianceTolerance = 1e-9;
constexpr double kDerivativeTolerance = 1e-6;
constexpr double kProstateL2Seconds = 1.0;
constexpr double kProstateMSeconds = 5.0;
constexpr double kNoiseSeconds = 10.0;

const std::vector<std::string> kProstateOrder = {"lcavol", "lweight", "svi", "lbph", "age", "pgg45", "lcp", "gleason"};

std::string data_file(const std::string& name) { return (std::filesystem::path(NOISEGATE_DATA_DIR) / name).string(); }

struct Result {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

json cli_json(std::vector<std::string> args) {
  args.insert(args.begin(), "noisegate");
  args.push_back("--format");
  args.push_back("json");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) throw std::runtime_error("noisegate exited with " + std::to_string(code) + ": " + err.str());
  return json::parse(out.str());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void compare_ranking(Result& r, const StepTrace& trace, const std::vector<std::string>& order,
                     const std::vector<double>& expected, double tolerance) {
  std::vector<std::string> got;
  for (const auto& ev : trace.evaluations) got.push_back(ev.chosen_covariate);
  r.require(got == order, "inclusion order");
  r.detail << " P:";
  for (std::size_t i = 0; i < expected.size() && i < trace.evaluations.size(); ++i) {
    const double p = trace.evaluations[i].p_value;
    r.detail << ' ' << fmt(p);
    r.require(std::fabs(p - expected[i]) <= tolerance,
              "step " + std::to_string(i + 1) + " P " + fmt(p) + " vs " + fmt(expected[i]));
  }
  r.require(trace.evaluations.size() == expected.size(), "number of steps");
}

std::vector<std::string> column_numbers(const StepTrace& trace) {
  std::vector<std::string> out;
  for (const auto& ev : trace.evaluations)
    if (ev.included) out.push_back(std::to_string(ev.chosen_column + 1));
  return out;
}

std::string joined(const std::vector<std::string>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s + ")";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Result criterion_1() {
  Result r;
  const auto t0 = std::chrono::steady_clock::now();
  const auto trace = cli_json({"rank", "--data", data_file("prostate.csv"), "--method", "l2"}).get<StepTrace>();
  const double elapsed = seconds_since(t0);
  compare_ranking(r, trace, kProstateOrder, {0.0000, 0.0122, 0.0123, 0.4233, 0.4952, 0.5541, 0.4093, 0.7636},
                  kL2Tolerance);
  r.require(trace.config.intercept && !trace.config.standardize, "manifest convention intercept=on standardize=off");
  r.require(elapsed < kProstateL2Seconds, "runtime");
  return r;
}

Result criterion_2() {
  Result r;
  const auto t0 = std::chrono::steady_clock::now();
  const auto trace = cli_json({"rank", "--data", data_file("prostate.csv"), "--method", "m"}).get<StepTrace>();
  const double elapsed = seconds_since(t0);
  compare_ranking(r, trace, kProstateOrder, {0.0000, 0.0083, 0.0101, 0.3408, 0.4083, 0.4839, 0.2845, 0.7300},
                  kMTolerance);
  r.require(elapsed < kProstateMSeconds, "runtime");
  return r;
}

Result criterion_3() {
  Result r;
  const auto l2 = cli_json({"perturb", "--data", data_file("prostate.csv"), "--perturb", "1=10", "--method", "l2"})
                      .at("after")
                      .get<StepTrace>();
  r.require(l2.evaluations.size() >= 2, "L2 trace length");
  if (l2.evaluations.size() >= 2) {
    const auto& second = l2.evaluations[1];
    r.detail << " L2 second: " << second.chosen_covariate << ' ' << fmt(second.p_value);
    r.require(second.chosen_covariate == "svi", "L2 second covariate");
    r.require(std::fabs(second.p_value - 0.1234) <= kPerturbL2Tolerance, "L2 second P");
  }
  r.require(l2.selected == std::vector<std::string>{"lcavol"}, "L2 selects only lcavol");

  const auto m = cli_json({"perturb", "--data", data_file("prostate.csv"), "--perturb", "1=10", "--method", "m"})
                     .at("after")
                     .get<StepTrace>();
  r.detail << "; M selected:";
  for (const auto& s : m.selected) r.detail << ' ' << s;
  r.require(m.selected == std::vector<std::string>{"lcavol", "svi", "lweight"}, "M selection");
  const std::vector<double> expected = {0.0000, 0.0176, 0.0366};
  r.detail << " P:";
  for (std::size_t i = 0; i < expected.size() && i < m.evaluations.size(); ++i) {
    r.detail << ' ' << fmt(m.evaluations[i].p_value);
    r.require(std::fabs(m.evaluations[i].p_value - expected[i]) <= kPerturbMTolerance, "M P step " + std::to_string(i + 1));
  }
  return r;
}

Result criterion_4a() {
  Result r;
  const auto trace = cli_json({"rank", "--data", data_file("birthwt.csv"), "--method", "l2"}).get<StepTrace>();
  std::vector<std::string> order;
  for (const auto& ev : trace.evaluations) order.push_back(std::to_string(ev.chosen_column + 1));
  r.detail << " order " << joined(order);
  r.require(order == std::vector<std::string>{"6", "9", "3", "5", "2", "8", "4", "1", "7"}, "inclusion order");
  const std::vector<double> expected = {0.0009, 0.0187, 0.0015, 0.0934, 0.0778, 0.8842, 0.9285, 0.8779, 0.7557};
  r.detail << " P:";
  for (std::size_t i = 0; i < expected.size() && i < trace.evaluations.size(); ++i) {
    r.detail << ' ' << fmt(trace.evaluations[i].p_value);
    r.require(std::fabs(trace.evaluations[i].p_value - expected[i]) <= kBirthTolerance, "P step " + std::to_string(i + 1));
  }
  const auto select = cli_json({"select", "--data", data_file("birthwt.csv"), "--alpha", "0.05"}).get<StepTrace>();
  r.detail << "; select(0.05) = " << joined(column_numbers(select));
  r.require(column_numbers(select) == std::vector<std::string>{"6", "9", "3"}, "select at 0.05");
  return r;
}

Result criterion_4b() {
  Result r;
  const auto select = cli_json({"select", "--data", data_file("birthwt.csv"), "--alpha", "0.1"}).get<StepTrace>();
  r.detail << " select(0.1) = " << joined(column_numbers(select)) << ", expected (6,9,3,5)";
  r.require(column_numbers(select) == std::vector<std::string>{"6", "9", "3", "5"}, "select at 0.1");
  return r;
}

Result criterion_5() {
  Result r;
  SimConfig cfg;
  cfg.n = 200;
  cfg.replications = 5000;
  cfg.threads = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const SimReport report = noise_reduction_distribution(cfg, RealMatrix::Ones(200, 1));
  const double elapsed = seconds_since(t0);
  r.detail << " KS " << fmt(report.ks_distance_chisq);
  r.require(report.ks_distance_chisq < kKsBound, "KS distance");
  r.require(elapsed < kNoiseSeconds, "runtime");
  return r;
}

Result criterion_6() {
  Result r;
  SimConfig cfg;
  cfg.n = 100;
  cfg.k = 20;
  cfg.alpha = 0.05;
  cfg.replications = 2000;
  cfg.threads = 0;
  const SimReport report = null_calibration(cfg);
  r.detail << " inclusion rate " << fmt(report.inclusion_rate);
  r.require(report.inclusion_rate >= kRateLow && report.inclusion_rate <= kRateHigh, "rate bracket");
  return r;
}

Result criterion_7() {
  Result r;
  std::vector<double> grid = {1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 0.01, 0.025, 0.05};
  for (int i = 1; i < 20; ++i) grid.push_back(0.05 * i);
  for (double p : {0.975, 0.99, 0.999, 0.9999, 1 - 1e-6, 1 - 1e-8, 1 - 1e-10}) grid.push_back(p);
  double worst_round = 0.0;
  for (std::size_t df = 1; df <= 10; ++df)
    for (double p : grid) worst_round = std::max(worst_round, std::fabs(pchisq(qchisq(p, df), df) - p));
  double worst_dual = 0.0;
  for (double alpha : {0.01, 0.05, 0.1})
    for (std::size_t k0 = 1; k0 <= 50; ++k0)
      worst_dual = std::max(worst_dual, std::fabs(max_chisq_tail(gate_threshold(alpha, k0), k0) - alpha));
  r.detail << " round trip " << worst_round << ", duality " << worst_dual;
  r.require(worst_round <= kRoundTripTolerance, "pchisq/qchisq round trip");
  r.require(worst_dual <= kDualityTolerance, "tail/threshold duality");
  return r;
}

double normal_equation_ss(const Dataset& data, const std::vector<std::size_t>& cols) {
  const RealMatrix x = assemble_design(data, cols, true);
  const RealVector b = (x.transpose() * x).ldlt().solve(x.transpose() * data.y());
  return (data.y() - x * b).squaredNorm();
}

Result criterion_8() {
  Result r;
  GateConfig rank;
  rank.exhaustive = true;

  double worst_invariance = 0.0;
  std::size_t greedy_steps = 0;
  for (const char* name : {"prostate", "birthwt"}) {
    const Dataset data = load_csv(data_file(std::string(name) + ".csv"), load_manifest(data_file(std::string(name) + ".manifest")));
    const StepTrace base = run_stepwise(data, rank);

    RealMatrix x = data.x();
    for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j) *= 0.01 + 3.7 * static_cast<double>(j);
    const Dataset y_scaled(data.name(), data.response_name(), data.y() * 1000.0, data.x(), data.column_names());
    const Dataset x_scaled(data.name(), data.response_name(), data.y(), x, data.column_names());
    for (const Dataset* variant : {&y_scaled, &x_scaled}) {
      const StepTrace t = run_stepwise(*variant, rank);
      r.require(t.evaluations.size() == base.evaluations.size(), "trace length under scaling");
      for (std::size_t s = 0; s < t.evaluations.size() && s < base.evaluations.size(); ++s) {
        r.require(t.evaluations[s].chosen_column == base.evaluations[s].chosen_column, "order under scaling");
        worst_invariance = std::max(worst_invariance, std::fabs(t.evaluations[s].p_value - base.evaluations[s].p_value));
        worst_invariance = std::max(worst_invariance, std::fabs(t.evaluations[s].statistic - base.evaluations[s].statistic) /
                                                          std::max(1.0, base.evaluations[s].statistic));
      }
    }

    std::vector<std::size_t> in;
    for (const auto& ev : base.evaluations) {
      double best = INFINITY;
      std::size_t arg = 0;
      for (std::size_t c = 0; c < data.k(); ++c) {
        if (std::find(in.begin(), in.end(), c) != in.end()) continue;
        auto trial = in;
        trial.push_back(c);
        const double ss = normal_equation_ss(data, trial);
        if (ss < best) {
          best = ss;
          arg = c;
        }
      }
      r.require(arg == ev.chosen_column, std::string(name) + " greedy step " + std::to_string(ev.step_index));
      ++greedy_steps;
      in.push_back(ev.chosen_column);
    }
  }
  r.require(worst_invariance <= kInvarianceTolerance, "scaling invariance");

  double worst_fd = 0.0;
  const double h = 1e-5;
  for (const RhoFunction f : {RhoFunction{RhoFamily::LogCosh, 1.0}, RhoFunction{RhoFamily::LogCosh, 2.0},
                              RhoFunction{RhoFamily::Huber, 1.345}}) {
    const double corner = f.family == RhoFamily::Huber ? f.c : kLogCoshBranch / f.c;
    for (double u = -20.0; u <= 20.0; u += 0.137) {
      if (std::fabs(std::fabs(u) - corner) < 1e-3) continue;
      worst_fd = std::max(worst_fd, std::fabs((rho(f, u + h) - rho(f, u - h)) / (2 * h) - rho_d1(f, u)));
      worst_fd = std::max(worst_fd, std::fabs((rho_d1(f, u + h) - rho_d1(f, u - h)) / (2 * h) - rho_d2(f, u)));
    }
  }
  r.require(worst_fd <= kDerivativeTolerance, "rho finite differences");
  r.detail << " invariance " << worst_invariance << ", greedy steps checked " << greedy_steps << ", rho FD "
           << worst_fd;
  return r;
}

struct Criterion {
  std::string id;
  std::string title;
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"1", "prostate L2 ranking", criterion_1},
      {"2", "prostate M ranking", criterion_2},
      {"3", "perturbation robustness y(1)=10", criterion_3},
      {"4a", "birth weight L2 ranking and select at alpha=0.05", criterion_4a},
      {"4b", "birth weight select at alpha=0.1", criterion_4b},
      {"5", "noise reduction law", criterion_5},
      {"6", "null calibration", criterion_6},
      {"7", "distribution functions", criterion_7},
      {"8", "invariance suite", criterion_8},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool all_passed = true;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << " [exception: " << e.what() << "]";
    }
    const double ms = seconds_since(t0) * 1000.0;
    all_passed = all_passed && r.pass;
    std::printf("%s criterion %s: %s:%s (%.0f ms)\n", r.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(),
                r.detail.str().c_str(), ms);
  }
  return all_passed ? 0 : 1;
}
