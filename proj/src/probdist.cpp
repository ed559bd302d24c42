#include "noisegate/probdist.hpp"

#include "noisegate/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace noisegate {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 10000;
constexpr double kTiny = 1e-300;

// Series expansion, converges quickly for x < a + 1.
double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) by the modified Lentz method, x >= a + 1.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw InvalidInputError("incomplete gamma shape must be positive");
  if (std::isnan(x)) throw InvalidInputError("incomplete gamma argument is NaN");
}

void check_df(std::size_t df) {
  if (df == 0) throw InvalidInputError("degrees of freedom must be at least 1");
}

double chisq_density(double x, std::size_t df) {
  if (x <= 0.0) return 0.0;
  const double half = 0.5 * static_cast<double>(df);
  return std::exp((half - 1.0) * std::log(x) - 0.5 * x - half * std::log(2.0) - std::lgamma(half));
}

// Root of g(x) = 0 for a monotone g on a bracket, Newton steps kept inside the
// bracket and replaced by bisection whenever they would leave it.
template <class Residual, class Slope>
double bracketed_root(Residual g, Slope slope, double lo, double hi) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double r = g(x);
    if (r == 0.0) return x;
    if (r < 0.0) lo = x; else hi = x;
    const double s = slope(x);
    double next = (s > 0.0 && std::isfinite(s)) ? x - r / s : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-15 * std::fabs(x) || hi - lo <= 1e-15 * hi) return next;
    x = next;
  }
  return x;
}

// x with P(chi2_df > x) = q, for q in (0, 1].
double upper_quantile(double q, std::size_t df) {
  if (q >= 1.0) return 0.0;
  double hi = 200.0;
  while (pchisq_upper(hi, df) > q) hi *= 2.0;
  // Work on whichever tail keeps the target representable without cancellation.
  if (q < 0.5) {
    const double log_q = std::log(q);
    return bracketed_root(
        [&](double x) { return log_q - std::log(pchisq_upper(x, df)); },
        [&](double x) { return chisq_density(x, df) / pchisq_upper(x, df); }, 0.0, hi);
  }
  const double p = 1.0 - q;
  return bracketed_root([&](double x) { return pchisq(x, df) - p; },
                        [&](double x) { return chisq_density(x, df); }, 0.0, hi);
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_fraction(a, x);
}

double pchisq(double x, std::size_t df) {
  check_df(df);
  if (std::isnan(x)) throw InvalidInputError("pchisq argument is NaN");
  return gamma_p(0.5 * static_cast<double>(df), 0.5 * x);
}

double pchisq_upper(double x, std::size_t df) {
  check_df(df);
  if (std::isnan(x)) throw InvalidInputError("pchisq argument is NaN");
  return gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

double qchisq(double p, std::size_t df) {
  check_df(df);
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("qchisq probability must lie in [0, 1)");
  if (p == 0.0) return 0.0;
  return upper_quantile(1.0 - p, df);
}

double max_chisq_tail(double x, std::size_t k0) {
  if (k0 == 0) throw InvalidInputError("k0 must be at least 1");
  const double q = pchisq_upper(x, 1);
  if (q >= 1.0) return 1.0;
  // 1 - (1 - q)^k0 without cancellation when q is small.
  const double tail = -std::expm1(static_cast<double>(k0) * std::log1p(-q));
  return std::fmin(1.0, std::fmax(0.0, tail));
}

double gate_threshold(double alpha, std::size_t k0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (k0 == 0) throw InvalidInputError("k0 must be at least 1");
  // Per-candidate tail probability q with (1 - q)^k0 = 1 - alpha.
  const double q = -std::expm1(std::log1p(-alpha) / static_cast<double>(k0));
  return upper_quantile(q, 1);
}

}  // namespace noisegate
