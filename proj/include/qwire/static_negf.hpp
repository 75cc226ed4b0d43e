// Steady-state scattering on the discretized chain: semi-infinite-lead
// self-energies, Landauer transmission from the retarded Green's function,
// scattering states normalized to unit incident amplitude, and root-finding
// calibration of the barrier height against a target transmission.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qwire/core.hpp"
#include "qwire/fields.hpp"
#include "qwire/linalg.hpp"

namespace qwire {

// Tight-binding H: onsite 2t' + V_i, hopping -t'.  The potential must vanish
// at the two lead-attachment sites (first and last site of the grid).
struct DiscreteHamiltonian {
  Grid grid;
  double t_prime = 0.0;        // eV
  std::vector<double> onsite;  // eV, 2t' + V_i

  std::size_t size() const { return onsite.size(); }
};

inline DiscreteHamiltonian build_hamiltonian(const PhysicalContext& ctx,
                                             const Grid& grid,
                                             std::span<const double> potential) {
  if (potential.size() != grid.count)
    throw std::invalid_argument("build_hamiltonian: potential size mismatch");
  if (potential.front() != 0.0 || potential.back() != 0.0)
    throw std::invalid_argument(
        "build_hamiltonian: potential must vanish at the lead attachment sites");
  DiscreteHamiltonian h;
  h.grid = grid;
  h.t_prime = hopping_energy(ctx, grid.spacing);
  h.onsite.resize(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i)
    h.onsite[i] = 2.0 * h.t_prime + potential[i];
  return h;
}

// Retarded self-energy of a semi-infinite perfect lead at energy E:
//   Sigma = -t' e^{i k a},  E = 2 t' (1 - cos ka),  0 < ka < pi.
inline cdouble lead_self_energy(double t_prime, double energy) {
  if (!(energy > 0.0) || !(energy < 4.0 * t_prime))
    throw std::domain_error(
        "lead_self_energy: energy outside the propagating band (evanescent "
        "branch is out of scope)");
  const double ka = std::acos(1.0 - energy / (2.0 * t_prime));
  return -t_prime * std::polar(1.0, ka);
}

inline double lead_broadening(double t_prime, double energy) {
  const cdouble sigma = lead_self_energy(t_prime, energy);
  return -2.0 * sigma.imag();  // Gamma = i(Sigma - Sigma^dagger) = 2 t' sin ka
}

namespace detail {

// Fills the tridiagonal of M = E - H - Sigma_L - Sigma_R.
inline void fill_inverse_gf(const DiscreteHamiltonian& h, double energy,
                            std::vector<cdouble>& diag,
                            std::vector<cdouble>& off) {
  const std::size_t n = h.size();
  const cdouble sigma = lead_self_energy(h.t_prime, energy);
  diag.resize(n);
  off.assign(n - 1, cdouble(h.t_prime, 0.0));  // -(H offdiag) = +t'
  for (std::size_t i = 0; i < n; ++i) diag[i] = cdouble(energy - h.onsite[i], 0.0);
  diag[0] -= sigma;
  diag[n - 1] -= sigma;
}

}  // namespace detail

// Landauer transmission T(E) = Gamma_L |G^R(1,N)|^2 Gamma_R via one banded
// solve for the last column of G^R.
inline double transmission(const DiscreteHamiltonian& h, double energy) {
  const std::size_t n = h.size();
  std::vector<cdouble> diag, off;
  detail::fill_inverse_gf(h, energy, diag, off);
  std::vector<cdouble> rhs(n, cdouble(0.0));
  rhs[n - 1] = 1.0;
  std::vector<cdouble> col = solve_tridiagonal(off, diag, off, rhs);
  const double gamma = lead_broadening(h.t_prime, energy);
  const double g1n = std::norm(col[0]);
  return gamma * gamma * g1n;
}

// Scattering state with unit incident amplitude from the left:
//   (E - H - Sigma_L - Sigma_R) psi = s,  s_0 = i Gamma_L e^{ika}.
// On field-free transmission-side sites |psi|^2 equals T exactly.
inline std::vector<cdouble> scattering_state(const DiscreteHamiltonian& h,
                                             double energy) {
  const std::size_t n = h.size();
  std::vector<cdouble> diag, off;
  detail::fill_inverse_gf(h, energy, diag, off);
  const double ka = std::acos(1.0 - energy / (2.0 * h.t_prime));
  const double gamma = lead_broadening(h.t_prime, energy);
  std::vector<cdouble> rhs(n, cdouble(0.0));
  rhs[0] = cdouble(0.0, gamma) * std::polar(1.0, ka);
  return solve_tridiagonal(off, diag, off, rhs);
}

inline std::vector<double> scattering_density(const DiscreteHamiltonian& h,
                                              double energy) {
  const auto psi = scattering_state(h, energy);
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
  return rho;
}

struct TransmissionCurve {
  std::vector<double> energies;  // eV
  std::vector<double> values;    // T in [0,1]
};

inline TransmissionCurve transmission_curve(const DiscreteHamiltonian& h,
                                            std::span<const double> energies) {
  TransmissionCurve c;
  c.energies.assign(energies.begin(), energies.end());
  c.values.resize(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i)
    c.values[i] = transmission(h, energies[i]);
  return c;
}

// Samples e*phi(x) onto the grid for a given barrier height.
inline std::vector<double> sample_barrier_potential(const PhysicalContext& ctx,
                                                    const Grid& grid,
                                                    const BarrierSpec& barrier) {
  std::vector<double> v(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i)
    v[i] = ctx.charge * barrier_profile(barrier, grid.x(i));
  return v;
}

struct CalibrationReport {
  double phi_max = 0.0;        // V
  double transmission = 0.0;   // T at phi_max
  std::size_t evaluations = 0;
  bool monotonic_scan = true;  // T non-increasing over the scanned bracket
};

class CalibrationError : public std::runtime_error {
 public:
  explicit CalibrationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Finds phi_max such that T(E) matches T_target to tol by bisection on the
// barrier height.  T(phi) is scanned first to locate a bracket; the scan
// doubles as a monotonicity check.
inline double calibrate_barrier(const PhysicalContext& ctx, const Grid& grid,
                                BarrierSpec shape, double energy,
                                double t_target, double tol = 1e-6,
                                CalibrationReport* report = nullptr) {
  if (!(t_target > 0.0 && t_target <= 1.0))
    throw std::domain_error("calibrate_barrier: require 0 < T_target <= 1");
  CalibrationReport rep;
  auto t_of = [&](double phi) {
    shape.phi_max = phi;
    auto v = sample_barrier_potential(ctx, grid, shape);
    auto h = build_hamiltonian(ctx, grid, v);
    ++rep.evaluations;
    return transmission(h, energy);
  };
  if (t_target == 1.0) {
    rep.phi_max = 0.0;
    rep.transmission = t_of(0.0);
    if (report) *report = rep;
    return 0.0;
  }

  const double phi_cap = 20.0 * energy / ctx.charge;
  const std::size_t scan_points = 64;
  double lo = 0.0, hi = -1.0;
  double t_lo = t_of(0.0);
  double prev = t_lo;
  for (std::size_t i = 1; i <= scan_points; ++i) {
    const double phi = phi_cap * double(i) / double(scan_points);
    const double t = t_of(phi);
    if (t > prev + 1e-9) rep.monotonic_scan = false;
    if (hi < 0.0 && t <= t_target) {
      hi = phi;
      lo = phi_cap * double(i - 1) / double(scan_points);
      break;
    }
    prev = t;
  }
  if (hi < 0.0)
    throw CalibrationError(
        "calibrate_barrier: no bracketing interval found in [0, 20 E/e]");
  (void)t_lo;

  double t_mid = 0.0, mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    t_mid = t_of(mid);
    if (std::abs(t_mid - t_target) <= tol) break;
    if (t_mid > t_target)
      lo = mid;
    else
      hi = mid;
  }
  if (std::abs(t_mid - t_target) > tol)
    throw CalibrationError("calibrate_barrier: bisection did not reach |T - " +
                           std::to_string(t_target) + "| <= tolerance");
  rep.phi_max = mid;
  rep.transmission = t_mid;
  if (report) *report = rep;
  return mid;
}

// Closed-form transmission of a sharp rectangular barrier (height v0 in eV,
// width w).  Serves as the independent continuum oracle for the lattice NEGF.
inline double rectangular_barrier_transmission_analytic(
    const PhysicalContext& ctx, double v0, double width, double energy) {
  if (!(energy > 0.0) || !(v0 > 0.0))
    throw std::domain_error("rectangular oracle: need E > 0 and V > 0");
  if (energy == v0) {
    const double k = wavenumber_from_energy(ctx, energy);
    const double q = 0.5 * k * width;
    return 1.0 / (1.0 + q * q);
  }
  if (energy < v0) {
    const double kappa =
        std::sqrt(2.0 * ctx.mass * (v0 - energy)) / ctx.hbar;
    const double sh = std::sinh(kappa * width);
    return 1.0 / (1.0 + v0 * v0 * sh * sh / (4.0 * energy * (v0 - energy)));
  }
  const double k2 = std::sqrt(2.0 * ctx.mass * (energy - v0)) / ctx.hbar;
  const double sn = std::sin(k2 * width);
  return 1.0 / (1.0 + v0 * v0 * sn * sn / (4.0 * energy * (energy - v0)));
}

}  // namespace qwire
