#include "noisegate/mfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace noisegate {
namespace {

constexpr double kWeightFloor = 1e-12;
constexpr double kStepTolerance = 1e-12;
constexpr double kL1ResidualFloor = 1e-8;

double max_abs(const RealVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Lower weighted median of values with positive weights.
double weighted_median(std::vector<std::pair<double, double>>& value_weight) {
  std::sort(value_weight.begin(), value_weight.end());
  double total = 0.0;
  for (const auto& [v, w] : value_weight) total += w;
  double cumulative = 0.0;
  for (const auto& [v, w] : value_weight) {
    cumulative += w;
    if (cumulative >= 0.5 * total) return v;
  }
  return value_weight.back().first;
}

LsFit finish_line(const RealVector& x, const RealVector& y, double a, double b, bool intercept) {
  LsFit fit;
  if (intercept) {
    fit.coefficients = RealVector(2);
    fit.coefficients << a, b;
  } else {
    fit.coefficients = RealVector::Constant(1, b);
  }
  fit.residuals = y - RealVector::Constant(y.size(), a) - b * x;
  fit.ss = fit.residuals.squaredNorm();
  fit.rank = static_cast<std::size_t>(fit.coefficients.size());
  return fit;
}

double median_in_place(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

void evaluate_m_sums(MFitSummary& fit, const RhoFunction& rho) {
  fit.objective = fit.s1 = fit.s2 = 0.0;
  for (Eigen::Index i = 0; i < fit.residuals.size(); ++i) {
    const double u = fit.residuals(i) / fit.sigma;
    fit.objective += noisegate::rho(rho, u);
    const double d1 = rho_d1(rho, u);
    fit.s1 += d1 * d1;
    fit.s2 += rho_d2(rho, u);
  }
}

MFitSummary m_fit_fixed_scale(const RealMatrix& design, const RealVector& response, const RhoFunction& rho,
                              double sigma, const std::optional<RealVector>& start) {
  validate(rho);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInputError("sigma must be positive");
  if (design.rows() != response.size()) throw DimensionError("design and response lengths differ");

  MFitSummary fit;
  fit.sigma = sigma;
  if (start) {
    if (start->size() != design.cols()) throw DimensionError("start vector does not match design columns");
    require_finite(*start, "start");
    fit.coefficients = *start;
  } else {
    fit.coefficients = fit_least_squares(design, response).coefficients;
  }
  fit.residuals = response - design * fit.coefficients;
  evaluate_m_sums(fit, rho);
  fit.objective_history.push_back(fit.objective);

  RealVector weights(response.size());
  for (int it = 1; it <= kMaxIrlsIterations; ++it) {
    for (Eigen::Index i = 0; i < response.size(); ++i)
      weights(i) = std::max(rho_weight(rho, fit.residuals(i) / sigma), kWeightFloor);
    RealVector next = fit_weighted_least_squares(design, response, weights).coefficients;
    const double step = max_abs(next - fit.coefficients);
    fit.coefficients = std::move(next);
    fit.residuals = response - design * fit.coefficients;
    evaluate_m_sums(fit, rho);
    fit.objective_history.push_back(fit.objective);
    fit.iterations = it;
    if (step <= kStepTolerance * (1.0 + max_abs(fit.coefficients))) return fit;
  }
  throw ConvergenceError("IRLS did not converge within " + std::to_string(kMaxIrlsIterations) + " iterations",
                         std::move(fit));
}

double mad_scale(const RealVector& residuals) {
  if (residuals.size() < 2) throw InvalidInputError("MAD needs at least two residuals");
  require_finite(residuals, "residuals");
  std::vector<double> v(residuals.data(), residuals.data() + residuals.size());
  const double center = median_in_place(v);
  for (auto& x : v) x = std::fabs(x - center);
  const double mad = kMadConsistency * median_in_place(v);
  if (!(mad > 0.0)) throw DegenerateScaleError("median absolute deviation is zero");
  return mad;
}

LsFit fit_l1(const RealMatrix& design, const RealVector& response) {
  LsFit current = fit_least_squares(design, response);
  LsFit best = current;
  double best_objective = best.residuals.cwiseAbs().sum();
  double previous = best_objective;
  RealVector weights(response.size());
  for (int it = 0; it < kMaxL1Iterations; ++it) {
    for (Eigen::Index i = 0; i < response.size(); ++i)
      weights(i) = 1.0 / std::max(std::fabs(current.residuals(i)), kL1ResidualFloor);
    current = fit_weighted_least_squares(design, response, weights);
    const double objective = current.residuals.cwiseAbs().sum();
    if (objective < best_objective) {
      best = current;
      best_objective = objective;
    }
    if (std::fabs(previous - objective) <= 1e-15 * std::max(1.0, objective)) break;
    previous = objective;
  }
  return best;
}

LsFit fit_l1_line(const RealVector& x, const RealVector& y, bool intercept) {
  if (x.size() != y.size()) throw DimensionError("covariate and response lengths differ");
  if (y.size() < 1) throw InvalidInputError("L1 fit needs at least one observation");
  require_finite(x, "covariate");
  require_finite(y, "response");
  const Eigen::Index n = y.size();
  std::vector<std::pair<double, double>> slopes;
  slopes.reserve(static_cast<std::size_t>(n));

  if (!intercept) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (x(i) != 0.0) slopes.emplace_back(y(i) / x(i), std::fabs(x(i)));
    return finish_line(x, y, 0.0, slopes.empty() ? 0.0 : weighted_median(slopes), false);
  }

  if (x.maxCoeff() == x.minCoeff()) {
    std::vector<double> v(y.data(), y.data() + n);
    return finish_line(x, y, median_in_place(v), 0.0, true);
  }

  // Start at the point closest to the least-squares line.
  const RealVector ls_residuals = y - RealVector::Constant(n, y.mean()) -
                                  ((x.array() - x.mean()) * (y.array() - y.mean())).sum() /
                                      (x.array() - x.mean()).square().sum() * (x.array() - x.mean()).matrix();
  Eigen::Index pivot = 0;
  ls_residuals.cwiseAbs().minCoeff(&pivot);

  double best_a = 0.0, best_b = 0.0;
  double best_objective = std::numeric_limits<double>::infinity();
  for (Eigen::Index guard = 0; guard <= n; ++guard) {
    slopes.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (x(j) == x(pivot)) continue;
      slopes.emplace_back((y(j) - y(pivot)) / (x(j) - x(pivot)), std::fabs(x(j) - x(pivot)));
    }
    const double b = weighted_median(slopes);
    const double a = y(pivot) - b * x(pivot);
    const double objective = (y - RealVector::Constant(n, a) - b * x).cwiseAbs().sum();
    if (!(objective < best_objective * (1.0 - 1e-15))) break;
    best_objective = objective;
    best_a = a;
    best_b = b;
    // The line also passes through the point that supplied the median slope.
    Eigen::Index next = pivot;
    double closest = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == pivot || x(j) == x(pivot)) continue;
      const double gap = std::fabs((y(j) - y(pivot)) / (x(j) - x(pivot)) - b);
      if (gap < closest) {
        closest = gap;
        next = j;
      }
    }
    pivot = next;
  }
  return finish_line(x, y, best_a, best_b, true);
}

RealMatrix assemble_design(const Dataset& dataset, const std::vector<std::size_t>& columns, bool intercept) {
  const auto n = static_cast<Eigen::Index>(dataset.n());
  const Eigen::Index offset = intercept ? 1 : 0;
  RealMatrix design(n, offset + static_cast<Eigen::Index>(columns.size()));
  if (intercept) design.col(0).setOnes();
  for (std::size_t j = 0; j < columns.size(); ++j)
    design.col(offset + static_cast<Eigen::Index>(j)) = dataset.x().col(static_cast<Eigen::Index>(columns[j]));
  return design;
}

L1Start l1_single_covariate_init(const Dataset& dataset, bool intercept) {
  if (dataset.k() < 1) throw InvalidInputError("L1 initialization needs at least one covariate");
  if (dataset.n() < 3) throw InvalidInputError("L1 initialization needs at least three observations");
  L1Start best;
  bool have = false;
  for (std::size_t j = 0; j < dataset.k(); ++j) {
    LsFit fit = fit_l1_line(dataset.x().col(static_cast<Eigen::Index>(j)), dataset.y(), intercept);
    const double objective = fit.residuals.cwiseAbs().sum();
    if (!have || objective < best.l1_objective) {
      best.column = j;
      best.l1_objective = objective;
      best.residuals = std::move(fit.residuals);
      have = true;
    }
  }
  best.scale = ScaleState{mad_scale(best.residuals), ScaleSource::L1Init};
  return best;
}

}  // namespace noisegate
