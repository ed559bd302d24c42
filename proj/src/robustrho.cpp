#include "noisegate/robustrho.hpp"

#include "noisegate/errors.hpp"

#include <cmath>
#include <string>

namespace noisegate {
namespace {

constexpr double kWeightCutoff = 1e-10;

// rho at the splice minus its argument: 2 log cosh(7.5) - 15, about -2 log 2.
const double kLogCoshOffset = 2.0 * std::log(std::cosh(0.5 * kLogCoshBranch)) - kLogCoshBranch;

}  // namespace

void validate(const RhoFunction& f) {
  if (!(f.c > 0.0) || !std::isfinite(f.c)) throw InvalidInputError("rho tuning constant must be positive");
}

double rho(const RhoFunction& f, double u) {
  const double c = f.c;
  if (f.family == RhoFamily::Huber) {
    const double a = std::fabs(u);
    return a <= c ? 0.5 * u * u : c * (a - 0.5 * c);
  }
  const double cu = c * u;
  if (std::fabs(cu) >= kLogCoshBranch) return std::fabs(u) + kLogCoshOffset / c;
  // 2 log(0.5 + 0.5 exp(cu))/c - u == 2 log(cosh(cu/2))/c, and
  // cosh(t) = 1 + 2 sinh^2(t/2): no cancellation near 0, no overflow.
  const double s = std::sinh(0.25 * cu);
  return 2.0 * std::log1p(2.0 * s * s) / c;
}

double rho_d1(const RhoFunction& f, double u) {
  const double c = f.c;
  if (f.family == RhoFamily::Huber) {
    if (std::fabs(u) <= c) return u;
    return u > 0 ? c : -c;
  }
  const double cu = c * u;
  if (std::fabs(cu) >= kLogCoshBranch) return u > 0 ? 1.0 : -1.0;
  // (exp(cu) - 1) / (exp(cu) + 1)
  return std::tanh(0.5 * cu);
}

double rho_d2(const RhoFunction& f, double u) {
  const double c = f.c;
  if (f.family == RhoFamily::Huber) return std::fabs(u) <= c ? 1.0 : 0.0;
  const double cu = c * u;
  if (std::fabs(cu) >= kLogCoshBranch) return 0.0;
  const double t = std::tanh(0.5 * cu);
  return 0.5 * c * (1.0 - t * t);
}

double rho_weight(const RhoFunction& f, double u) {
  if (std::fabs(u) < kWeightCutoff) return rho_d2(f, 0.0);
  return rho_d1(f, u) / u;
}

std::string_view to_string(RhoFamily family) {
  return family == RhoFamily::Huber ? "huber" : "logcosh";
}

RhoFamily rho_family_from_string(std::string_view name) {
  if (name == "logcosh") return RhoFamily::LogCosh;
  if (name == "huber") return RhoFamily::Huber;
  throw InvalidInputError("unknown rho family '" + std::string(name) + "'");
}

}  // namespace noisegate
