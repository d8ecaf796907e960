#include <catch_amalgamated.hpp>

#include <cmath>

#include "fput/errors.hpp"
#include "fput/potentials.hpp"

using Catch::Approx;
using fput::Potential;

namespace {

// Independent closed forms written out by hand.
double inverse_square(double r) { return (std::pow(1.0 + r, -2.0) + 2.0 * r - 1.0) / 6.0; }
double lj2(double r) {
  const double a = std::pow(1.0 + r, -2.0) - 1.0;
  return a * a / 20.0;
}

// Sixth-order central second difference.
template <class F>
double fd2(F f, double r, double h) {
  return (2.0 * f(r - 3 * h) - 27.0 * f(r - 2 * h) + 270.0 * f(r - h) - 490.0 * f(r) + 270.0 * f(r + h) -
          27.0 * f(r + 2 * h) + 2.0 * f(r + 3 * h)) /
         (180.0 * h * h);
}

}  // namespace

TEST_CASE("potential values at the minimum", "[potentials]") {
  const auto p = Potential::inverse_monomial(2.0);
  CHECK(p.eval(0.0, 0) == Approx(0.0).margin(1e-15));
  CHECK(p.eval(0.0, 1) == Approx(0.0).margin(1e-15));
  CHECK(p.eval(0.0, 2) == Approx(1.0).epsilon(1e-14));
  CHECK(p.k() == 3.0);

  const auto lj = Potential::lennard_jones(2.0);
  CHECK(lj.eval(0.0, 2) == Approx(0.4).epsilon(1e-14));
  CHECK(lj.m() == 4.0);
  CHECK(lj.k() == 2.0);
}

TEST_CASE("closed forms match hand-written potentials", "[potentials]") {
  const auto p = Potential::inverse_monomial(2.0);
  const auto lj = Potential::lennard_jones(2.0);
  for (double r : {-0.9, -0.5, -0.2, -0.01}) {
    CHECK(p.value(r) == Approx(inverse_square(r)).epsilon(1e-12));
    CHECK(lj.value(r) == Approx(lj2(r)).epsilon(1e-12));
    CHECK(p.d2(r) == Approx(fd2(inverse_square, r, 1e-3)).epsilon(1e-7));
    CHECK(lj.d2(r) == Approx(fd2(lj2, r, 1e-3)).epsilon(1e-7));
  }
}

TEST_CASE("derivatives are mutually consistent", "[potentials]") {
  for (const auto& p : {Potential::inverse_monomial(3.0), Potential::lennard_jones(3.0),
                        Potential::two_term(2.5, 1.7), Potential::two_term(4.0, 6.0)}) {
    for (double r : {-0.8, -0.3, -0.05, 0.5}) {
      const double h = 1e-5;
      for (int order = 0; order < 3; ++order) {
        const double fd = (p.eval(r + h, order) - p.eval(r - h, order)) / (2 * h);
        CHECK(p.eval(r, order + 1) == Approx(fd).epsilon(1e-6).margin(1e-8));
      }
    }
  }
}

TEST_CASE("second difference error is second order", "[potentials]") {
  const auto p = Potential::two_term(3.0, 2.0);
  for (double r : {-0.9, -0.4, -0.2, 2.0, 5.0}) {
    auto err = [&](double h) {
      return std::abs((p.value(r + h) - 2 * p.value(r) + p.value(r - h)) / (h * h) - p.d2(r));
    };
    const double e1 = err(1e-2), e2 = err(5e-3), e3 = err(2.5e-3);
    if (e1 < 1e-9) continue;  // quadratic branch is exact
    CHECK(e1 / e2 == Approx(4.0).epsilon(0.05));
    CHECK(e2 / e3 == Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("quadratic extension to the right", "[potentials]") {
  const auto p = Potential::lennard_jones(2.0);
  CHECK(p.value(1.5) == Approx(0.5 * 0.4 * 2.25));
  CHECK(p.d1(1.5) == Approx(0.6));
  CHECK(p.d2(3.0) == Approx(0.4));
  CHECK(p.d3(3.0) == 0.0);
}

TEST_CASE("singular expansion bound", "[potentials]") {
  for (const auto& p : {Potential::inverse_monomial(2.0), Potential::lennard_jones(2.0),
                        Potential::two_term(3.0, 1.5)}) {
    const double m = p.m(), k = p.k();
    double c_coarse = 0, c_fine = 0;
    for (int i = 0; i < 400; ++i) {
      const double u = std::pow(10.0, -3.0 + 3.0 * i / 400.0);
      const double res = std::abs(std::pow(u, m + 1) * (m + 1) * p.d1(u - 1.0) + 1.0) / std::pow(u, k);
      (i % 2 == 0 ? c_coarse : c_fine) = std::max(i % 2 == 0 ? c_coarse : c_fine, res);
    }
    CHECK(c_coarse == Approx(c_fine).epsilon(1e-2));
    CHECK(c_fine < 10.0);
  }
}

TEST_CASE("validation reports", "[potentials]") {
  const auto ok = fput::validate(Potential::inverse_monomial(2.0));
  CHECK(ok.pass());
  CHECK(ok.singularity_constant == Approx(1.0).epsilon(1e-6));

  const auto small = fput::validate(Potential::inverse_monomial(0.5));
  CHECK_FALSE(small.pass());
  CHECK(small.failures().find("m > 1") != std::string::npos);

  const auto equal = fput::validate(Potential::two_term(3.0, 3.0));
  CHECK_FALSE(equal.pass());
  CHECK(equal.failures().find("m != k") != std::string::npos);

  CHECK_THROWS_AS(fput::require_valid(Potential::two_term(3.0, 3.0)), fput::InvalidParameter);
  CHECK_NOTHROW(fput::require_valid(Potential::lennard_jones(2.0)));
}

TEST_CASE("domain and order errors", "[potentials]") {
  const auto p = Potential::inverse_monomial(2.0);
  CHECK_THROWS_AS(p.eval(-1.0, 0), fput::DomainError);
  CHECK_THROWS_AS(p.eval(-2.0, 1), fput::DomainError);
  CHECK_THROWS_AS(p.eval(0.0, 4), fput::UnsupportedOrder);
  CHECK_THROWS_AS(p.eval(0.0, -1), fput::UnsupportedOrder);
}
