// Unit system, parabolic dispersion and the uniform spatial lattice shared by
// every other component.
//
// Working units are nm / fs / eV.  In this system hbar and the free electron
// mass are order unity, the elementary charge is exactly 1 (1 e * 1 V = 1 eV)
// and laser parameters like 800 nm / 26.7 fs / 1 V/nm need no conversion.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwire {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double speed_of_light = 299.792458;  // nm / fs

struct PhysicalContext {
  double hbar = 0.6582119569;  // eV fs
  double mass = 5.685630;      // eV fs^2 / nm^2  (free electron mass)
  double charge = 1.0;         // elementary charge; charge * (V/nm) = eV/nm

  void validate() const {
    if (!(hbar > 0.0))
      throw std::invalid_argument("PhysicalContext: hbar must be > 0");
    if (!(mass > 0.0))
      throw std::invalid_argument("PhysicalContext: mass must be > 0");
  }
};

// Conduction-band plane wave e^{i(kx - omega t)} with E(k) = hbar^2 k^2 / 2m.
struct PlaneWave {
  double k = 0.0;         // 1/nm
  double energy = 0.0;    // eV
  double omega = 0.0;     // 1/fs
  double velocity = 0.0;  // nm/fs (band velocity hbar k / m)
};

inline PlaneWave dispersion(const PhysicalContext& ctx, double k) {
  if (!(k > 0.0))
    throw std::domain_error("dispersion: wavenumber must be positive");
  PlaneWave w;
  w.k = k;
  w.energy = ctx.hbar * ctx.hbar * k * k / (2.0 * ctx.mass);
  w.omega = w.energy / ctx.hbar;
  w.velocity = ctx.hbar * k / ctx.mass;
  return w;
}

inline double wavenumber_from_energy(const PhysicalContext& ctx, double energy) {
  if (!(energy > 0.0))
    throw std::domain_error("wavenumber_from_energy: energy must be positive");
  return std::sqrt(2.0 * ctx.mass * energy) / ctx.hbar;
}

// Uniform lattice x_i = x0 + i*spacing with a designated interaction window
// (region II, index interval [i1, i2]).  Excitations must live strictly
// inside the window; regions I and III stay field free.
struct Grid {
  double x0 = 0.0;
  double spacing = 0.05;  // nm
  std::size_t count = 0;
  std::size_t i1 = 0;  // region II lower index
  std::size_t i2 = 0;  // region II upper index
  std::vector<double> probes;  // x positions used for trace extraction

  Grid() = default;
  Grid(double x0_, double spacing_, std::size_t count_, std::size_t i1_,
       std::size_t i2_, std::vector<double> probes_ = {})
      : x0(x0_), spacing(spacing_), count(count_), i1(i1_), i2(i2_),
        probes(std::move(probes_)) {
    validate();
  }

  void validate() const {
    if (!(spacing > 0.0))
      throw std::invalid_argument("Grid: spacing must be > 0");
    if (count < 3)
      throw std::invalid_argument("Grid: need at least 3 sites");
    if (!(i1 < i2 && i2 < count))
      throw std::invalid_argument("Grid: require 0 <= i1 < i2 < count");
  }

  double x(std::size_t i) const { return x0 + spacing * double(i); }
  double x_min() const { return x0; }
  double x_max() const { return x(count - 1); }

  std::size_t index_near(double xq) const {
    double r = (xq - x0) / spacing;
    if (r < 0.0) r = 0.0;
    double top = double(count - 1);
    if (r > top) r = top;
    return std::size_t(std::llround(r));
  }

  bool contains(double xq) const { return xq >= x_min() && xq <= x_max(); }

  // Rejects excitations whose support touches the region II boundary sites.
  void require_support_inside_region2(double lo, double hi) const {
    if (!(lo > x(i1) && hi < x(i2)))
      throw std::invalid_argument(
          "Grid: excitation support [" + std::to_string(lo) + ", " +
          std::to_string(hi) + "] nm must lie strictly inside region II (" +
          std::to_string(x(i1)) + ", " + std::to_string(x(i2)) + ") nm");
  }
};

// Nearest-neighbour hopping energy t' = hbar^2 / (2 m a^2) of the discretized
// kinetic operator; the lattice band is E(k) = 2 t' (1 - cos ka).
inline double hopping_energy(const PhysicalContext& ctx, double spacing) {
  return ctx.hbar * ctx.hbar / (2.0 * ctx.mass * spacing * spacing);
}

inline double lattice_band_energy(double t_prime, double ka) {
  return 2.0 * t_prime * (1.0 - std::cos(ka));
}

}  // namespace qwire
