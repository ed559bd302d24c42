#pragma once

#include <string_view>

namespace noisegate {

enum class RhoFamily { LogCosh, Huber };

/// Symmetric convex loss used by the M variant of the gate.
///
/// LogCosh with tuning constant c:
///   rho(u) = 2 log(0.5 + 0.5 exp(c u)) / c - u        for |c u| < 15
///   rho(u) = |u| - (15 - 2 log cosh(7.5)) / c         for |c u| >= 15
/// The smooth branch tends to |u| - 2 log(2)/c; the linear branch is shifted
/// to meet it exactly at the splice (the shift is 2 log(2) less 6.1e-7), so
/// rho stays continuous and convex. The derivative jumps up by 1 - tanh(7.5),
/// about 6.1e-7, at the splice.
///
/// Huber with the same c field as its corner: u^2/2 inside, c(|u| - c/2) outside.
struct RhoFunction {
  RhoFamily family = RhoFamily::LogCosh;
  double c = 1.0;
};

/// |c u| at which LogCosh switches to its linear branch. Fixed.
inline constexpr double kLogCoshBranch = 15.0;

/// Throws InvalidInputError unless c > 0 and finite.
void validate(const RhoFunction& f);

double rho(const RhoFunction& f, double u);
double rho_d1(const RhoFunction& f, double u);
double rho_d2(const RhoFunction& f, double u);

/// IRLS weight rho'(u)/u, with its limit rho''(0) near u = 0.
double rho_weight(const RhoFunction& f, double u);

std::string_view to_string(RhoFamily family);
RhoFamily rho_family_from_string(std::string_view name);

}  // namespace noisegate
