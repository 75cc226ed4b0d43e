#include <catch2/catch.hpp>

#include <random>

#include "qwire/tbc.hpp"

using namespace qwire;

TEST_CASE("boundary kernel solves its generating equation") {
  const double t_prime = 15.2399, dt = 0.005, hbar = 0.6582119569;
  auto kernel = BoundaryKernel::make(t_prime, dt, hbar, 4000);
  REQUIRE(kernel.s.size() == 4001);
  CHECK(std::abs(kernel.s[0]) < 1.0);

  const double l = kernel.lambda;
  CHECK(l == Approx(dt * t_prime / (2.0 * hbar)).epsilon(1e-14));

  // alpha(w) must satisfy l(1+w) a^2 - [(2l - i) + (2l + i) w] a + l(1+w) = 0.
  const cdouble i_unit(0.0, 1.0);
  for (double theta : {0.3, 1.2, 2.5, 4.0}) {
    const cdouble w = 0.35 * std::polar(1.0, theta);
    cdouble a(0.0), wp(1.0);
    for (std::size_t m = 0; m < kernel.s.size(); ++m) {
      a += kernel.s[m] * wp;
      wp *= w;
    }
    const cdouble p = l * (1.0 + w);
    const cdouble q = -((2.0 * l - i_unit) + (2.0 * l + i_unit) * w);
    const cdouble res = p * a * a + q * a + p;
    CHECK(std::abs(res) < 1e-10);
  }

  SECTION("coefficients decay") {
    CHECK(std::abs(kernel.s[4000]) < std::abs(kernel.s[10]));
  }
}

TEST_CASE("fast convolver matches the direct sum") {
  const double t_prime = 15.2399, dt = 0.002, hbar = 0.6582119569;

  SECTION("dense check through the first two tiers") {
    const std::size_t n = 6000;
    auto kernel = BoundaryKernel::make(t_prime, dt, hbar, n + 1);
    FastConvolver fast(kernel.s, n + 1);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cdouble> x;
    for (std::size_t q = 0; q < n; ++q) {
      const cdouble y = fast.head();
      cdouble ref(0.0);
      for (std::size_t m = 1; m <= q; ++m) ref += kernel.s[m] * x[q - m];
      CHECK(std::abs(y - ref) < 1e-12);
      const cdouble xv(u(rng), u(rng));
      x.push_back(xv);
      fast.push(xv);
    }
  }

  SECTION("spot check deep into the open tier") {
    const std::size_t n = 70000;
    auto kernel = BoundaryKernel::make(t_prime, dt, hbar, n + 1);
    FastConvolver fast(kernel.s, n + 1);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cdouble> x;
    for (std::size_t q = 0; q < n; ++q) {
      if (q % 4999 == 0 && q > 0) {
        const cdouble y = fast.head();
        cdouble ref(0.0);
        for (std::size_t m = 1; m <= q; ++m) ref += kernel.s[m] * x[q - m];
        CHECK(std::abs(y - ref) < 1e-11);
      }
      const cdouble xv(u(rng), u(rng));
      x.push_back(xv);
      fast.push(xv);
    }
  }
}
