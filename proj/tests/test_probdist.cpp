#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "noisegate/errors.hpp"
#include "noisegate/probdist.hpp"

#include <cmath>
#include <vector>

using namespace noisegate;

namespace {

std::vector<double> probability_grid() {
  std::vector<double> grid = {1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 0.01, 0.025, 0.05, 0.1};
  for (int i = 1; i < 20; ++i) grid.push_back(0.05 * i);
  for (double p : {0.9, 0.95, 0.975, 0.99, 0.999, 0.9999, 1 - 1e-6, 1 - 1e-8, 1 - 1e-10}) grid.push_back(p);
  return grid;
}

}  // namespace

TEST_CASE("chi2 with one degree of freedom matches the error function") {
  for (double x = 0.0; x < 60.0; x += 0.37) {
    CHECK(pchisq(x, 1) == doctest::Approx(std::erf(std::sqrt(x / 2.0))).epsilon(1e-14));
    CHECK(pchisq_upper(x, 1) == doctest::Approx(std::erfc(std::sqrt(x / 2.0))).epsilon(1e-12));
  }
  CHECK(pchisq(1.0, 1) == doctest::Approx(0.68268949213708589717).epsilon(1e-15));
}

TEST_CASE("chi2 with two degrees of freedom is exponential") {
  for (double x = 0.0; x < 80.0; x += 0.9) {
    CHECK(pchisq(x, 2) == doctest::Approx(-std::expm1(-x / 2.0)).epsilon(1e-14));
    CHECK(pchisq_upper(x, 2) == doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("even degrees of freedom match the Poisson sum") {
  for (std::size_t df : {4u, 6u, 10u, 20u}) {
    for (double x = 0.5; x < 60.0; x += 1.3) {
      double term = 1.0;
      double sum = 1.0;
      for (std::size_t i = 1; i < df / 2; ++i) {
        term *= (x / 2.0) / static_cast<double>(i);
        sum += term;
      }
      CHECK(pchisq_upper(x, df) == doctest::Approx(std::exp(-x / 2.0) * sum).epsilon(1e-11));
    }
  }
}

TEST_CASE("incomplete gamma halves sum to one") {
  for (double a : {0.5, 1.0, 2.5, 7.0, 30.0})
    for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0})
      CHECK(gamma_p(a, x) + gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma_p(1.0, 0.0) == 0.0);
  CHECK(gamma_q(1.0, 0.0) == 1.0);
}

TEST_CASE("known quantiles") {
  CHECK(qchisq(0.95, 1) == doctest::Approx(3.8414588206941259584).epsilon(1e-13));
  CHECK(qchisq(0.99360884904545501240, 1) == doctest::Approx(7.4365720687730914219).epsilon(1e-12));
  CHECK(qchisq(0.0, 3) == 0.0);
}

TEST_CASE("quantile round trip on the probability grid") {
  for (std::size_t df = 1; df <= 12; ++df)
    for (double p : probability_grid()) CHECK(std::fabs(pchisq(qchisq(p, df), df) - p) <= 1e-9);
}

TEST_CASE("pchisq is monotone in x") {
  for (std::size_t df : {1u, 3u, 9u}) {
    double previous = 0.0;
    for (double x = 0.0; x < 50.0; x += 0.05) {
      const double p = pchisq(x, df);
      CHECK(p >= previous);
      previous = p;
    }
  }
}

TEST_CASE("max chi2 tail against the closed form") {
  CHECK(max_chisq_tail(3.841458821, 8) == doctest::Approx(0.33657956865998122928).epsilon(1e-9));
  CHECK(max_chisq_tail(3.841458821, 1) == doctest::Approx(0.049999999990879).epsilon(1e-10));
  for (std::size_t k0 = 1; k0 <= 40; k0 += 3)
    for (double x : {0.1, 1.0, 4.0, 9.0, 20.0})
      CHECK(max_chisq_tail(x, k0) == doctest::Approx(1.0 - std::pow(std::erf(std::sqrt(x / 2.0)), k0)).epsilon(1e-10));
  CHECK(max_chisq_tail(0.0, 5) == 1.0);
  CHECK(max_chisq_tail(200.0, 5) > 0.0);
}

TEST_CASE("gate threshold and tail are inverse") {
  for (double alpha : {0.01, 0.05, 0.1})
    for (std::size_t k0 = 1; k0 <= 50; ++k0) CHECK(std::fabs(max_chisq_tail(gate_threshold(alpha, k0), k0) - alpha) <= 1e-8);
}

TEST_CASE("gate threshold grows with k0 and shrinks with alpha") {
  for (std::size_t k0 = 1; k0 < 60; ++k0) CHECK(gate_threshold(0.05, k0 + 1) > gate_threshold(0.05, k0));
  CHECK(gate_threshold(0.01, 8) > gate_threshold(0.05, 8));
  CHECK(gate_threshold(0.05, 1) == doctest::Approx(3.8414588206941259584).epsilon(1e-12));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(pchisq(1.0, 0), InvalidInputError);
  CHECK_THROWS_AS(pchisq(std::nan(""), 1), InvalidInputError);
  CHECK_THROWS_AS(qchisq(1.0, 1), DomainError);
  CHECK_THROWS_AS(qchisq(-0.1, 1), DomainError);
  CHECK_THROWS_AS(gate_threshold(0.0, 3), DomainError);
  CHECK_THROWS_AS(gate_threshold(1.0, 3), DomainError);
  CHECK_THROWS_AS(gate_threshold(0.05, 0), InvalidInputError);
  CHECK_THROWS_AS(max_chisq_tail(1.0, 0), InvalidInputError);
  CHECK(pchisq(-1.0, 2) == 0.0);
}
