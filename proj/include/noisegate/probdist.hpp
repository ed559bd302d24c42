#pragma once

// Chi-square distribution functions and the tail law of the maximum of k0
// independent chi-square(1) variables.

#include <cstddef>

namespace noisegate {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly.
double gamma_q(double a, double x);

/// P(chi2_df <= x). Zero for x <= 0.
double pchisq(double x, std::size_t df);
/// P(chi2_df > x), accurate deep into the tail.
double pchisq_upper(double x, std::size_t df);
/// Inverse of pchisq on [0, 1).
double qchisq(double p, std::size_t df);

/// P(E > x) where E is the maximum of k0 independent chi2_1 variables,
/// i.e. 1 - pchisq(x, 1)^k0.
double max_chisq_tail(double x, std::size_t k0);

/// Smallest statistic a candidate must exceed to pass the gate at level alpha:
/// qchisq((1 - alpha)^(1/k0), 1).
double gate_threshold(double alpha, std::size_t k0);

}  // namespace noisegate
