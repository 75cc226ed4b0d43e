// Derived quantities: densities, probability currents (canonical and
// gauge-invariant), time-dependent transmission, the distance to the steady
// state, power spectra and k-weighted current superpositions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "qwire/fft.hpp"
#include "qwire/fields.hpp"
#include "qwire/tdse.hpp"

namespace qwire {

struct CurrentTrace {
  double probe_x = 0.0;        // nm
  std::vector<double> times;   // fs, uniform
  std::vector<double> values;  // nm/fs for a unit-amplitude incident wave
};

enum class SpectrumWindow { none, hann };

struct Spectrum {
  std::vector<double> omegas;  // 1/fs, non-negative half
  std::vector<double> power;   // |j(omega)|^2
  bool baseline_subtracted = false;
  double baseline = 0.0;
  SpectrumWindow window = SpectrumWindow::none;
  std::size_t pad_factor = 4;
  double domega = 0.0;
};

struct DensityMap {
  std::vector<double> times;      // fs
  std::vector<double> positions;  // nm
  std::vector<std::vector<double>> rho;  // rho[it][ix] >= 0
};

inline double density_at(const WaveField& f, std::size_t j) {
  return std::norm(f.total_at(j));
}

inline std::vector<double> density(const WaveField& f) {
  std::vector<double> rho(f.grid.count);
  for (std::size_t j = 0; j < f.grid.count; ++j) rho[j] = density_at(f, j);
  return rho;
}

// j = (hbar/m) Im[psi* d_x psi]; the incident part uses its analytic
// derivative (i k psi0), the scattered part a centered difference.
inline double current_canonical(const WaveField& f, std::size_t j) {
  if (j == 0 || j + 1 >= f.grid.count)
    throw std::invalid_argument("current_canonical: probe must be interior");
  const cdouble psi = f.total_at(j);
  const cdouble dpsi0 = cdouble(0.0, f.incident.k) * f.incident_at(j);
  const cdouble ddelta =
      (f.delta[j + 1] - f.delta[j - 1]) / (2.0 * f.grid.spacing);
  const cdouble grad = dpsi0 + ddelta;
  return f.ctx.hbar / f.ctx.mass * std::imag(std::conj(psi) * grad);
}

// j_phys = j_canonical - (e/m) A rho; identical to the canonical current
// wherever A vanishes.
inline double current_gauge_invariant(const WaveField& f,
                                      const Excitation& exc, std::size_t j) {
  const double jc = current_canonical(f, j);
  if (!exc.velocity_gauge()) return jc;
  const double a = exc.vector_potential_at(f.grid.x(j), f.time);
  if (a == 0.0) return jc;
  return jc - f.ctx.charge / f.ctx.mass * a * density_at(f, j);
}

// T(x,t) = j m / (hbar k); a current ratio, not clamped to [0,1] during
// transients.
inline CurrentTrace transmission_td(const CurrentTrace& trace,
                                    const PlaneWave& incident) {
  CurrentTrace out = trace;
  const double j0 = incident.velocity;  // hbar k / m
  for (auto& v : out.values) v /= j0;
  return out;
}

// Signed distance D = sum_i [rho_s(x_i) - rho(x_i)] a over a common index
// window; the L1 variant takes |...| before summing.
inline double distance_D(std::span<const double> rho,
                         std::span<const double> rho_steady, double spacing,
                         bool l1 = false) {
  if (rho.size() != rho_steady.size())
    throw std::invalid_argument("distance_D: grids of rho and rho_s differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double d = rho_steady[i] - rho[i];
    acc += l1 ? std::abs(d) : d;
  }
  return acc * spacing;
}

struct PowerSpectrumOptions {
  bool subtract_baseline = true;
  double baseline = 0.0;  // typically j0 = hbar k / m
  SpectrumWindow window = SpectrumWindow::none;
  std::size_t pad_factor = 4;
};

// |X(omega)|^2 with X(omega_m) = dt * sum_n x_n e^{-i omega_m t_n} on a
// >= 4x zero-padded grid.  Parseval holds exactly for the unwindowed case.
inline Spectrum power_spectrum(const CurrentTrace& trace,
                               const PowerSpectrumOptions& opt = {}) {
  const std::size_t n = trace.times.size();
  if (n < 4 || trace.values.size() != n)
    throw std::invalid_argument("power_spectrum: trace too short or ragged");
  if (opt.pad_factor < 4)
    throw std::invalid_argument("power_spectrum: pad factor must be >= 4");
  const double dt = trace.times[1] - trace.times[0];
  if (!(dt > 0.0))
    throw std::invalid_argument("power_spectrum: non-increasing time grid");
  for (std::size_t i = 1; i < n; ++i) {
    const double step = trace.times[i] - trace.times[i - 1];
    if (std::abs(step - dt) > 1e-9 * dt)
      throw std::invalid_argument("power_spectrum: sampling must be uniform");
  }

  const std::size_t m = opt.pad_factor * n;
  std::vector<cdouble> x(m, cdouble(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double v = trace.values[i];
    if (opt.subtract_baseline) v -= opt.baseline;
    if (opt.window == SpectrumWindow::hann)
      v *= 0.5 * (1.0 - std::cos(2.0 * pi * double(i) / double(n - 1)));
    x[i] = v;
  }
  Fft fft(m);
  std::vector<cdouble> xf(m);
  fft.forward(x, xf);

  Spectrum s;
  s.baseline_subtracted = opt.subtract_baseline;
  s.baseline = opt.baseline;
  s.window = opt.window;
  s.pad_factor = opt.pad_factor;
  s.domega = 2.0 * pi / (double(m) * dt);
  const std::size_t half = m / 2;
  s.omegas.resize(half + 1);
  s.power.resize(half + 1);
  for (std::size_t i = 0; i <= half; ++i) {
    s.omegas[i] = s.domega * double(i);
    const cdouble big = dt * xf[i];
    s.power[i] = std::norm(big);
  }
  return s;
}

inline double spectrum_power_at(const Spectrum& s, double omega) {
  if (s.omegas.empty()) return 0.0;
  const double r = omega / s.domega;
  const std::size_t i =
      std::min<std::size_t>(s.omegas.size() - 1,
                            std::size_t(std::max(0.0, std::round(r))));
  return s.power[i];
}

inline CurrentTrace superpose_currents(std::span<const CurrentTrace> traces,
                                       std::span<const double> weights) {
  if (traces.empty() || traces.size() != weights.size())
    throw std::invalid_argument("superpose_currents: need one weight per trace");
  CurrentTrace out;
  out.probe_x = traces[0].probe_x;
  out.times = traces[0].times;
  out.values.assign(out.times.size(), 0.0);
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& tr = traces[t];
    if (tr.times.size() != out.times.size() || tr.probe_x != out.probe_x)
      throw std::invalid_argument("superpose_currents: mismatched trace grids");
    for (std::size_t i = 0; i < out.times.size(); ++i) {
      if (tr.times[i] != out.times[i])
        throw std::invalid_argument(
            "superpose_currents: mismatched trace grids");
      out.values[i] += weights[t] * tr.values[i];
    }
  }
  return out;
}

}  // namespace qwire
