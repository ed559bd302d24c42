#pragma once

// Forward stepwise selection gated against pure noise.
//
// At each step the excluded covariate that lowers the loss the most is the
// candidate. It is admitted only if the probability that the best of k0
// standard normal noise columns would lower the loss by more is below alpha.
// That probability is 1 - pchisq(T, 1)^k0 where, for least squares,
//
//     T = n (1 - ss(k0) / ss(k1))
//
// and for M-regression at the incumbent's scale sigma
//
//     T = 2 (s_rho(k1) - s_rho(k0)) * s2 / s1
//
// with s1 = sum rho'(r_i/sigma)^2 and s2 = sum rho''(r_i/sigma) taken over the
// residuals of the candidate fit. Both are the reductions measured in units
// of their expected chi2_1 scale under a noise column.

#include "noisegate/dataset.hpp"
#include "noisegate/mfit.hpp"
#include "noisegate/robustrho.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace noisegate {

enum class Method { L2, M };

struct GateConfig {
  double alpha = 0.05;
  Method method = Method::L2;
  RhoFunction rho;  ///< M only
  bool intercept = true;
  bool standardize = false;
  std::optional<std::size_t> max_steps;  ///< unset means k
  bool exhaustive = false;
  std::optional<double> fixed_sigma;  ///< M only; disables the L1 start and MAD updates

  /// Throws DomainError / InvalidInputError on out-of-range fields.
  void validate() const;
};

struct StepEvaluation {
  std::size_t step_index = 0;  ///< 1-based
  std::string chosen_covariate;
  std::size_t chosen_column = 0;  ///< 0-based column of the dataset
  std::size_t k1 = 0;             ///< covariates included before this step
  std::size_t k0 = 0;             ///< candidates remaining at scan time
  double ss_before = 0.0;         ///< ss(k1) or s_rho(k1, sigma)
  double ss_after = 0.0;          ///< ss(k0) or s_rho(k0, sigma)
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> sigma;
  bool included = false;  ///< p_value < alpha
};

enum class Termination { GateFailed, Exhausted, MaxSteps, Degenerate };

struct StepTrace {
  GateConfig config;
  std::vector<StepEvaluation> evaluations;
  std::vector<std::string> selected;
  Termination termination_reason = Termination::Exhausted;
};

/// Mixed into errors thrown by run_stepwise so callers can recover the steps
/// completed before the failure.
class TraceCarrier {
 public:
  virtual ~TraceCarrier() = default;
  virtual const StepTrace& partial_trace() const = 0;
};

template <class E>
class TracedError : public E, public TraceCarrier {
 public:
  TracedError(const E& error, StepTrace trace) : E(error), trace_(std::move(trace)) {}
  const StepTrace& partial_trace() const override { return trace_; }

 private:
  StepTrace trace_;
};

/// n (1 - ss_after / ss_before).
double l2_gate_statistic(double ss_before, double ss_after, std::size_t n);

/// 2 (objective_before - fit_after.objective) * fit_after.s2 / fit_after.s1.
double m_gate_statistic(double objective_before, const MFitSummary& fit_after);

/// 1 - pchisq(statistic, 1)^k0.
double step_p_value(double statistic, std::size_t k0);

/// Result of one scan, with the chosen candidate's fit kept for the caller.
struct CandidateScan {
  StepEvaluation evaluation;
  std::optional<MFitSummary> chosen_m_fit;
};

/// Evaluates every excluded covariate against the incumbent set `included`.
/// For the M method `scale` is required. Does not apply config.standardize.
CandidateScan scan_candidates_detailed(const Dataset& dataset, const std::vector<std::size_t>& included,
                                       const GateConfig& config, const std::optional<ScaleState>& scale);

StepEvaluation scan_candidates(const Dataset& dataset, const std::vector<std::size_t>& included,
                               const GateConfig& config, const std::optional<ScaleState>& scale);

StepTrace run_stepwise(const Dataset& dataset, const GateConfig& config);

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);
std::string_view to_string(Termination reason);
Termination termination_from_string(std::string_view name);

}  // namespace noisegate
