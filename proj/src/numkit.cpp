#include "noisegate/numkit.hpp"

#include "noisegate/errors.hpp"

#include <string>

namespace noisegate {

void require_finite(const RealMatrix& m, const char* what) {
  if (!m.allFinite()) throw InvalidInputError(std::string(what) + " contains non-finite entries");
}

void require_finite(const RealVector& v, const char* what) {
  if (!v.allFinite()) throw InvalidInputError(std::string(what) + " contains non-finite entries");
}

namespace {

LsFit solve(const RealMatrix& design, const RealVector& response) {
  LsFit fit;
  if (design.cols() == 0) {
    fit.coefficients = RealVector::Zero(0);
    fit.residuals = response;
    fit.ss = response.squaredNorm();
    return fit;
  }
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod;
  cod.setThreshold(kRankThreshold);
  cod.compute(design);
  fit.coefficients = cod.solve(response);
  fit.rank = static_cast<std::size_t>(cod.rank());
  fit.residuals = response - design * fit.coefficients;
  fit.ss = fit.residuals.squaredNorm();
  return fit;
}

}  // namespace

LsFit fit_least_squares(const RealMatrix& design, const RealVector& response) {
  if (design.rows() < 1) throw DimensionError("design must have at least one row");
  if (design.rows() != response.size())
    throw DimensionError("design has " + std::to_string(design.rows()) + " rows but response has " +
                         std::to_string(response.size()) + " entries");
  require_finite(design, "design");
  require_finite(response, "response");
  return solve(design, response);
}

LsFit fit_weighted_least_squares(const RealMatrix& design, const RealVector& response,
                                 const RealVector& weights) {
  if (design.rows() < 1) throw DimensionError("design must have at least one row");
  if (design.rows() != response.size() || weights.size() != response.size())
    throw DimensionError("design, response and weights must have matching lengths");
  require_finite(design, "design");
  require_finite(response, "response");
  require_finite(weights, "weights");
  if ((weights.array() < 0.0).any()) throw InvalidInputError("weights must be nonnegative");
  if (!(weights.array() > 0.0).any()) throw DegenerateWeightsError("all weights are zero");

  const RealVector root = weights.array().sqrt();
  LsFit scaled = solve(root.asDiagonal() * design, root.cwiseProduct(response));

  LsFit fit;
  fit.coefficients = std::move(scaled.coefficients);
  fit.rank = scaled.rank;
  fit.residuals = response - design * fit.coefficients;
  fit.ss = fit.residuals.squaredNorm();
  return fit;
}

}  // namespace noisegate
