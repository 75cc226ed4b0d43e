// Complex tridiagonal and cyclic-tridiagonal solvers (Thomas algorithm plus a
// Sherman-Morrison corner correction).  These back both the static Green's
// function solves and every Crank-Nicolson step, so they avoid allocation
// when used through the workspace form.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwire {

using cdouble = std::complex<double>;

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Reusable buffers for repeated solves of the same size.
struct TridiagonalWorkspace {
  std::vector<cdouble> scratch_c;  // modified upper diagonal
  std::vector<cdouble> scratch_d;  // modified rhs
  std::vector<cdouble> u, q;       // cyclic correction vectors

  void resize(std::size_t n) {
    scratch_c.resize(n);
    scratch_d.resize(n);
  }
};

// Solves lower[i-1]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i].
// lower/upper have length n-1 (lower[i] couples row i+1 to i).
inline void solve_tridiagonal(std::span<const cdouble> lower,
                              std::span<const cdouble> diag,
                              std::span<const cdouble> upper,
                              std::span<const cdouble> rhs,
                              std::span<cdouble> x,
                              TridiagonalWorkspace& ws) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  if (lower.size() != n - 1 || upper.size() != n - 1 || rhs.size() != n ||
      x.size() != n)
    throw std::invalid_argument("solve_tridiagonal: inconsistent sizes");
  ws.resize(n);
  cdouble* c = ws.scratch_c.data();
  cdouble* d = ws.scratch_d.data();

  cdouble piv = diag[0];
  if (piv == cdouble(0.0, 0.0))
    throw NumericalError("solve_tridiagonal: zero pivot at row 0");
  cdouble inv = 1.0 / piv;
  c[0] = upper.empty() ? cdouble(0.0) : upper[0] * inv;
  d[0] = rhs[0] * inv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = diag[i] - lower[i - 1] * c[i - 1];
    if (piv == cdouble(0.0, 0.0))
      throw NumericalError("solve_tridiagonal: zero pivot at row " +
                           std::to_string(i));
    inv = 1.0 / piv;
    c[i] = (i + 1 < n) ? upper[i] * inv : cdouble(0.0);
    d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) * inv;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
}

inline std::vector<cdouble> solve_tridiagonal(
    std::span<const cdouble> lower, std::span<const cdouble> diag,
    std::span<const cdouble> upper, std::span<const cdouble> rhs) {
  TridiagonalWorkspace ws;
  std::vector<cdouble> x(diag.size());
  solve_tridiagonal(lower, diag, upper, rhs, x, ws);
  return x;
}

// Cyclic variant: additionally corner_lo couples row 0 to column n-1 and
// corner_hi couples row n-1 to column 0 (periodic chain).
inline void solve_cyclic_tridiagonal(std::span<const cdouble> lower,
                                     std::span<const cdouble> diag,
                                     std::span<const cdouble> upper,
                                     cdouble corner_lo, cdouble corner_hi,
                                     std::span<const cdouble> rhs,
                                     std::span<cdouble> x,
                                     TridiagonalWorkspace& ws) {
  const std::size_t n = diag.size();
  if (n < 3)
    throw std::invalid_argument("solve_cyclic_tridiagonal: need n >= 3");
  // Sherman-Morrison: A = T + alpha * e_0 u^T-style rank-1 update.
  const cdouble alpha = -diag[0];  // any nonzero shift works; this is robust
  std::vector<cdouble> dmod(diag.begin(), diag.end());
  dmod[0] -= alpha;
  dmod[n - 1] -= corner_hi * corner_lo / alpha;

  ws.u.assign(n, cdouble(0.0));
  ws.q.assign(n, cdouble(0.0));
  std::vector<cdouble> z(n);
  // Solve T z = rhs and T q = w where w = alpha e_0 + corner_hi e_{n-1}.
  solve_tridiagonal(lower, dmod, upper, rhs, z, ws);
  ws.u[0] = alpha;
  ws.u[n - 1] = corner_hi;
  std::vector<cdouble> q(n);
  solve_tridiagonal(lower, dmod, upper, ws.u, q, ws);
  // v^T = e_0^T + (corner_lo/alpha) e_{n-1}^T
  const cdouble vz = z[0] + corner_lo / alpha * z[n - 1];
  const cdouble vq = q[0] + corner_lo / alpha * q[n - 1];
  const cdouble denom = 1.0 + vq;
  if (denom == cdouble(0.0, 0.0))
    throw NumericalError("solve_cyclic_tridiagonal: singular correction");
  const cdouble factor = vz / denom;
  for (std::size_t i = 0; i < n; ++i) x[i] = z[i] - factor * q[i];
}

}  // namespace qwire
