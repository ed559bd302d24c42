#include "noisegate/simlab.hpp"

#include "noisegate/errors.hpp"
#include "noisegate/probdist.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace noisegate {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::size_t bin_of(double p) {
  const auto b = static_cast<std::size_t>(std::floor(p * static_cast<double>(kHistogramBins)));
  return std::min(b, kHistogramBins - 1);
}

// Runs body(r) for r in [0, count) over the requested number of threads.
// body writes only to slot r, so the outcome is independent of scheduling.
template <class Body>
void for_each_replication(std::size_t count, std::size_t threads, Body body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t r = t; r < count; r += threads) body(r);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SimReport summarize(std::string experiment, const std::vector<double>& p_values, double alpha, double ks) {
  SimReport report;
  report.experiment = std::move(experiment);
  report.replication_count = p_values.size();
  report.p_value_histogram.assign(kHistogramBins, 0);
  std::size_t included = 0;
  for (const double p : p_values) {
    ++report.p_value_histogram[bin_of(p)];
    if (p < alpha) ++included;
  }
  report.inclusion_rate = static_cast<double>(included) / static_cast<double>(p_values.size());
  report.ks_distance_chisq = ks;
  return report;
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64_mix(seed ^ splitmix64_mix(stream))) {}

std::uint64_t CounterRng::next_u64() { return splitmix64_mix(key_ + (++counter_) * kGolden); }

double CounterRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() { return normal_quantile(uniform()); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                 1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                 1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                 2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                 7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

void SimConfig::validate() const {
  if (replications < 1) throw InvalidInputError("replications must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (n <= k + 2) throw InvalidInputError("simulation needs n > k + 2");
  noisegate::validate(rho);
}

SimReport null_calibration(const SimConfig& config) {
  config.validate();
  if (config.k < 1) throw InvalidInputError("null calibration needs at least one covariate");

  GateConfig gate;
  gate.alpha = config.alpha;
  gate.method = config.method;
  gate.rho = config.rho;
  gate.max_steps = 1;
  gate.exhaustive = true;

  const auto n = static_cast<Eigen::Index>(config.n);
  const auto k = static_cast<Eigen::Index>(config.k);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < config.k; ++j) names.push_back("noise" + std::to_string(j + 1));

  std::vector<double> p_values(config.replications);
  std::vector<double> statistics(config.replications);
  for_each_replication(config.replications, config.threads, [&](std::size_t rep) {
    CounterRng rng(config.seed, rep);
    RealVector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.normal();
    RealMatrix x(n, k);
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.normal();
    const Dataset data("null", "y", std::move(y), std::move(x), names);
    const StepTrace trace = run_stepwise(data, gate);
    p_values[rep] = trace.evaluations.front().p_value;
    statistics[rep] = trace.evaluations.front().statistic;
  });

  const double ks = ks_distance(statistics, [&](double x) { return 1.0 - max_chisq_tail(x, config.k); });
  return summarize("null", p_values, config.alpha, ks);
}

std::vector<double> noise_reduction_statistics(const SimConfig& config, const RealMatrix& k1_design,
                                               const std::optional<RealVector>& response) {
  if (config.replications < 1) throw InvalidInputError("replications must be at least 1");
  const auto n = k1_design.rows();
  if (n < 1) throw DimensionError("design must have at least one row");
  if (response && response->size() != n) throw DimensionError("response length does not match design");
  if (static_cast<std::size_t>(n) <= static_cast<std::size_t>(k1_design.cols()) + 2)
    throw InvalidInputError("noise reduction needs more rows than design columns + 2");
  require_finite(k1_design, "design");

  std::vector<double> stats(config.replications);
  for_each_replication(config.replications, config.threads, [&](std::size_t rep) {
    CounterRng rng(config.seed, rep);
    RealVector y(n);
    if (response) {
      y = *response;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.normal();
    }
    RealMatrix augmented(n, k1_design.cols() + 1);
    augmented.leftCols(k1_design.cols()) = k1_design;
    for (Eigen::Index i = 0; i < n; ++i) augmented(i, k1_design.cols()) = rng.normal();
    const double ss1 = fit_least_squares(k1_design, y).ss;
    const double ss0 = std::min(ss1, fit_least_squares(augmented, y).ss);
    stats[rep] = l2_gate_statistic(ss1, ss0, static_cast<std::size_t>(n));
  });
  return stats;
}

SimReport noise_reduction_distribution(const SimConfig& config, const RealMatrix& k1_design,
                                       const std::optional<RealVector>& response) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const std::vector<double> stats = noise_reduction_statistics(config, k1_design, response);
  std::vector<double> p_values(stats.size());
  std::transform(stats.begin(), stats.end(), p_values.begin(), [](double s) { return pchisq_upper(s, 1); });
  const double ks = ks_distance(stats, [](double x) { return pchisq(x, 1); });
  return summarize("noise", p_values, config.alpha, ks);
}

}  // namespace noisegate
