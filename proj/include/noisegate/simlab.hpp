#pragma once

// Monte Carlo checks of the gate under pure noise.

#include "noisegate/numkit.hpp"
#include "noisegate/robustrho.hpp"
#include "noisegate/stepper.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace noisegate {

/// Counter-based generator: output i of stream (seed, stream) is
/// splitmix64_mix(key + (i + 1) * 0x9E3779B97F4A7C15) with
/// key = splitmix64_mix(seed ^ splitmix64_mix(stream)). Any draw is a pure
/// function of (seed, stream, i), so replications can run in any order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform();
  /// Standard normal by inversion of the normal CDF (Wichura AS 241).
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Inverse standard normal CDF, relative accuracy about 1e-16 (AS 241, PPND16).
double normal_quantile(double p);

struct SimConfig {
  std::size_t n = 100;
  std::size_t k = 20;
  std::size_t replications = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  Method method = Method::L2;
  RhoFunction rho;
  std::size_t threads = 1;  ///< 0 uses every hardware thread; results do not depend on it

  void validate() const;
};

inline constexpr std::size_t kHistogramBins = 20;

struct SimReport {
  std::string experiment;
  double inclusion_rate = 0.0;
  std::vector<std::size_t> p_value_histogram;  ///< kHistogramBins equal bins on [0, 1]
  double ks_distance_chisq = 0.0;
  std::size_t replication_count = 0;
};

/// Draws y and all k covariates i.i.d. N(0, 1), runs the first gate step and
/// records its P-value. ks_distance_chisq compares the first-step statistics
/// with the law of the maximum of k chi2_1 variables.
SimReport null_calibration(const SimConfig& config);

/// Appends one fresh N(0, 1) column to `k1_design` per replication and
/// records n (ss(k1) - ss(k1 + noise)) / ss(k1). ks_distance_chisq compares
/// these with chi2_1. The response is drawn N(0, 1) per replication unless
/// given.
SimReport noise_reduction_distribution(const SimConfig& config, const RealMatrix& k1_design,
                                       const std::optional<RealVector>& response = std::nullopt);

/// Noise-reduction statistics of the individual replications, in order.
std::vector<double> noise_reduction_statistics(const SimConfig& config, const RealMatrix& k1_design,
                                               const std::optional<RealVector>& response = std::nullopt);

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf);

}  // namespace noisegate

#include <algorithm>

template <class Cdf>
double noisegate::ks_distance(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}
