#include <catch2/catch.hpp>

#include <random>

#include "qwire/linalg.hpp"

using namespace qwire;

namespace {

std::vector<cdouble> random_vec(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cdouble> v(n);
  for (auto& x : v) x = cdouble(u(rng), u(rng));
  return v;
}

}  // namespace

TEST_CASE("tridiagonal solve reproduces the right-hand side") {
  std::mt19937 rng(7);
  for (std::size_t n : {3u, 17u, 400u}) {
    auto lower = random_vec(n - 1, rng);
    auto upper = random_vec(n - 1, rng);
    auto diag = random_vec(n, rng);
    for (auto& d : diag) d += cdouble(4.0, 1.0);  // well conditioned
    auto rhs = random_vec(n, rng);
    auto x = solve_tridiagonal(lower, diag, upper, rhs);

    for (std::size_t i = 0; i < n; ++i) {
      cdouble acc = diag[i] * x[i];
      if (i > 0) acc += lower[i - 1] * x[i - 1];
      if (i + 1 < n) acc += upper[i] * x[i + 1];
      CHECK(std::abs(acc - rhs[i]) < 1e-11);
    }
  }
}

TEST_CASE("cyclic tridiagonal solve honors the corner couplings") {
  std::mt19937 rng(11);
  for (std::size_t n : {5u, 64u, 301u}) {
    auto lower = random_vec(n - 1, rng);
    auto upper = random_vec(n - 1, rng);
    auto diag = random_vec(n, rng);
    for (auto& d : diag) d += cdouble(5.0, 2.0);
    const cdouble clo(0.3, -0.2), chi(-0.1, 0.4);
    auto rhs = random_vec(n, rng);
    std::vector<cdouble> x(n);
    TridiagonalWorkspace ws;
    solve_cyclic_tridiagonal(lower, diag, upper, clo, chi, rhs, x, ws);

    for (std::size_t i = 0; i < n; ++i) {
      cdouble acc = diag[i] * x[i];
      if (i > 0) acc += lower[i - 1] * x[i - 1];
      if (i + 1 < n) acc += upper[i] * x[i + 1];
      if (i == 0) acc += clo * x[n - 1];
      if (i == n - 1) acc += chi * x[0];
      CHECK(std::abs(acc - rhs[i]) < 1e-10);
    }
  }
}

TEST_CASE("singular pivot is reported") {
  std::vector<cdouble> diag{cdouble(0.0), cdouble(1.0)};
  std::vector<cdouble> off{cdouble(0.0)};
  std::vector<cdouble> rhs{cdouble(1.0), cdouble(1.0)};
  CHECK_THROWS_AS(solve_tridiagonal(off, diag, off, rhs), NumericalError);
}
