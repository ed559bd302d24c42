#pragma once

// Fixed-scale M-regression and the scale bookkeeping of the M gate.

#include "noisegate/dataset.hpp"
#include "noisegate/errors.hpp"
#include "noisegate/numkit.hpp"
#include "noisegate/robustrho.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace noisegate {

/// Normal-consistency factor applied to the median absolute deviation.
inline constexpr double kMadConsistency = 1.4826;
inline constexpr int kMaxIrlsIterations = 200;
inline constexpr int kMaxL1Iterations = 50;

struct MFitSummary {
  RealVector coefficients;
  RealVector residuals;  ///< y - X b, unscaled
  double sigma = 1.0;
  double objective = 0.0;  ///< sum rho(r_i / sigma)
  double s1 = 0.0;         ///< sum rho'(r_i / sigma)^2
  double s2 = 0.0;         ///< sum rho''(r_i / sigma)
  int iterations = 0;
  /// Objective after the start and after every IRLS step; nonincreasing.
  std::vector<double> objective_history;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, MFitSummary last) : Error(what), last_(std::move(last)) {}
  const char* kind() const noexcept override { return "ConvergenceError"; }
  const MFitSummary& last_iterate() const { return last_; }

 private:
  MFitSummary last_;
};

enum class ScaleSource { L1Init, MadUpdate };

struct ScaleState {
  double sigma = 1.0;
  ScaleSource source = ScaleSource::L1Init;
};

/// Minimizes sum rho((y_i - x_i' b) / sigma) over b by iteratively reweighted
/// least squares. Starts from `start` when given, otherwise from the
/// least-squares fit.
MFitSummary m_fit_fixed_scale(const RealMatrix& design, const RealVector& response, const RhoFunction& rho,
                              double sigma, const std::optional<RealVector>& start = std::nullopt);

/// Recomputes objective, s1 and s2 for given residuals at scale sigma.
void evaluate_m_sums(MFitSummary& fit, const RhoFunction& rho);

/// kMadConsistency * median(|r - median(r)|).
double mad_scale(const RealVector& residuals);

/// Least absolute deviations fit by IRLS with weights 1/max(|r|, 1e-8).
LsFit fit_l1(const RealMatrix& design, const RealVector& response);

/// Exact least absolute deviations fit of y on one covariate, with or
/// without an intercept. Coefficients are (intercept, slope) or (slope).
/// Through the origin the slope is a weighted median of y_i / x_i; with an
/// intercept the fit descends from pivot to pivot, each time taking the
/// weighted median of the slopes through the current pivot, until the
/// objective stops decreasing. A constant covariate gets slope 0.
LsFit fit_l1_line(const RealVector& x, const RealVector& y, bool intercept);

struct L1Start {
  std::size_t column = 0;  ///< 0-based covariate index
  RealVector residuals;
  double l1_objective = 0.0;
  ScaleState scale;
};

/// Best single-covariate L1 regression of y (plus intercept when flagged),
/// fitted exactly by fit_l1_line;
/// its residuals seed the M procedure's scale.
L1Start l1_single_covariate_init(const Dataset& dataset, bool intercept);

/// Design with an optional leading column of ones followed by the given covariates.
RealMatrix assemble_design(const Dataset& dataset, const std::vector<std::size_t>& columns, bool intercept);

}  // namespace noisegate
