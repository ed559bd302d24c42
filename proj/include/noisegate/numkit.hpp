#pragma once

// Dense least squares used by every candidate evaluation.

#include <Eigen/Dense>

#include <cstddef>

namespace noisegate {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Pivots below this fraction of the largest pivot are treated as zero.
inline constexpr double kRankThreshold = 1e-12;

struct LsFit {
  RealVector coefficients;
  RealVector residuals;
  double ss = 0.0;  ///< sum of squared residuals
  std::size_t rank = 0;
};

/// Minimum-norm least-squares solution via complete orthogonal decomposition
/// (column-pivoted QR followed by a right-side orthogonal reduction).
LsFit fit_least_squares(const RealMatrix& design, const RealVector& response);

/// Minimizes sum w_i (y_i - x_i' b)^2 by solving the sqrt(w)-scaled system.
LsFit fit_weighted_least_squares(const RealMatrix& design, const RealVector& response,
                                 const RealVector& weights);

inline double sum_squared_residuals(const LsFit& fit) { return fit.ss; }

/// Throws InvalidInputError when any entry is NaN or infinite.
void require_finite(const RealMatrix& m, const char* what);
void require_finite(const RealVector& v, const char* what);

}  // namespace noisegate
