// Excitation builders: the ramped scalar barrier with its switching envelope,
// the localized laser vector potential, the analytic electric field and the
// derived ponderomotive potential.  All profiles are exactly zero outside
// their declared support.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include "qwire/core.hpp"

namespace qwire {

// Scalar potential profile: sin^2 ramp over the first tenth of the support,
// flat plateau over [L/10, 9L/10], mirrored ramp down over the last tenth.
struct BarrierSpec {
  double phi_max = 0.0;  // V (phi_max > 0 acts as a barrier for the electron)
  double length = 160.0;   // nm
  double x_start = 0.0;    // nm

  void validate() const {
    if (!(length > 0.0))
      throw std::invalid_argument("BarrierSpec: length must be > 0");
  }
  double x_end() const { return x_start + length; }
};

inline double barrier_profile(const BarrierSpec& b, double x) {
  const double u = x - b.x_start;
  if (u <= 0.0 || u >= b.length) return 0.0;
  const double L = b.length;
  if (u < 0.1 * L) {
    const double s = std::sin(5.0 * pi * u / L);
    return b.phi_max * s * s;
  }
  if (u <= 0.9 * L) return b.phi_max;
  const double s = std::sin(5.0 * pi * u / L - 4.5 * pi);
  return b.phi_max * (1.0 - s * s);
}

// Switching envelope chi(t): sin^2 ramp up, plateau at 1, optional sin^2 ramp
// down.  An absent plateau duration means the potential stays on.
struct SwitchSpec {
  double ramp_on = 5.0;               // fs
  std::optional<double> plateau;      // fs; nullopt = unbounded
  double ramp_off = 5.0;              // fs (used only with a bounded plateau)

  void validate() const {
    if (!(ramp_on > 0.0))
      throw std::invalid_argument("SwitchSpec: ramp_on must be > 0");
    if (plateau) {
      if (!(*plateau >= 0.0))
        throw std::invalid_argument("SwitchSpec: plateau must be >= 0");
      if (!(ramp_off > 0.0))
        throw std::invalid_argument("SwitchSpec: ramp_off must be > 0");
    }
  }
  // Time after which chi is identically zero again (infinity if unbounded).
  double end_time() const {
    if (!plateau) return std::numeric_limits<double>::infinity();
    return ramp_on + *plateau + ramp_off;
  }
};

inline double switch_envelope(const SwitchSpec& s, double t) {
  if (t <= 0.0) return 0.0;
  if (t < s.ramp_on) {
    const double v = std::sin(0.5 * pi * t / s.ramp_on);
    return v * v;
  }
  if (!s.plateau) return 1.0;
  const double t_off = s.ramp_on + *s.plateau;
  if (t <= t_off) return 1.0;
  const double u = t - t_off;
  if (u >= s.ramp_off) return 0.0;
  const double v = std::cos(0.5 * pi * u / s.ramp_off);
  return v * v;
}

// Laser pulse in velocity gauge:
//   A(x,t) = a0 sin^2(pi (x-x_start)/L) sin^2(pi t/tau) sin(omega0 t)
// on [x_start, x_start+L] x [0, tau], zero elsewhere.  a0 = f0/omega0 so that
// the peak of |dA/dt| in the slowly varying limit equals the field amplitude.
struct PulseSpec {
  double f0 = 1.0;         // V/nm peak field
  double lambda0 = 800.0;  // nm central wavelength
  double tau = 0.0;        // fs total duration
  double length = 160.0;   // nm spatial support L
  double x_start = 0.0;    // nm

  double omega0() const { return 2.0 * pi * speed_of_light / lambda0; }
  double a0() const { return f0 / omega0(); }
  double carrier_period() const { return lambda0 / speed_of_light; }
  double x_end() const { return x_start + length; }

  // tau = n complete carrier oscillations (10 cycles of 800 nm ~ 26.7 fs).
  static PulseSpec from_cycles(double f0, double lambda0, int cycles,
                               double length, double x_start = 0.0) {
    if (cycles < 1)
      throw std::invalid_argument("PulseSpec: need at least one cycle");
    PulseSpec p;
    p.f0 = f0;
    p.lambda0 = lambda0;
    p.length = length;
    p.x_start = x_start;
    p.tau = double(cycles) * p.carrier_period();
    return p;
  }

  void validate() const {
    if (!(lambda0 > 0.0))
      throw std::invalid_argument("PulseSpec: lambda0 must be > 0");
    if (!(tau > 0.0))
      throw std::invalid_argument("PulseSpec: tau must be > 0");
    if (!(length > 0.0))
      throw std::invalid_argument("PulseSpec: length must be > 0");
  }
};

inline double vector_potential(const PulseSpec& p, double x, double t) {
  const double u = x - p.x_start;
  if (u <= 0.0 || u >= p.length || t <= 0.0 || t >= p.tau) return 0.0;
  const double sx = std::sin(pi * u / p.length);
  const double st = std::sin(pi * t / p.tau);
  return p.a0() * sx * sx * st * st * std::sin(p.omega0() * t);
}

// F = -dA/dt, full product rule (envelope derivative included).
inline double electric_field(const PulseSpec& p, double x, double t) {
  const double u = x - p.x_start;
  if (u <= 0.0 || u >= p.length || t <= 0.0 || t >= p.tau) return 0.0;
  const double sx = std::sin(pi * u / p.length);
  const double st = std::sin(pi * t / p.tau);
  const double w0 = p.omega0();
  const double envelope_rate = (pi / p.tau) * std::sin(2.0 * pi * t / p.tau);
  return -p.a0() * sx * sx *
         (envelope_rate * std::sin(w0 * t) + st * st * w0 * std::cos(w0 * t));
}

// Ponderomotive potential U_p = e^2 E0^2(x,t) / (4 m omega0^2) built from the
// slowly varying field amplitude E0(x,t) = f0 sin^2(pi u/L) sin^2(pi t/tau).
inline double ponderomotive_profile(const PulseSpec& p,
                                    const PhysicalContext& ctx, double x,
                                    double t) {
  const double u = x - p.x_start;
  if (u <= 0.0 || u >= p.length || t <= 0.0 || t >= p.tau) return 0.0;
  const double sx = std::sin(pi * u / p.length);
  const double st = std::sin(pi * t / p.tau);
  const double amp = p.f0 * sx * sx * st * st;
  const double w0 = p.omega0();
  const double q = ctx.charge;
  return q * q * amp * amp / (4.0 * ctx.mass * w0 * w0);
}

// One excitation acting on the chain.  scalar_barrier couples through the
// potential energy e*phi(x)*chi(t); laser_pulse couples in velocity gauge
// through A(x,t); uniform_vector is a spatially constant A(t) usable only
// with periodic whole-box propagation (it has no localized support).
struct Excitation {
  enum class Kind { none, scalar_barrier, laser_pulse, uniform_vector };

  Kind kind = Kind::none;
  BarrierSpec barrier;
  SwitchSpec sw;
  PulseSpec pulse;
  // uniform_vector reuses pulse.f0 / pulse.lambda0 / pulse.tau as A(t) shape.

  static Excitation none() { return Excitation{}; }
  static Excitation switched_barrier(BarrierSpec b, SwitchSpec s) {
    b.validate();
    s.validate();
    Excitation e;
    e.kind = Kind::scalar_barrier;
    e.barrier = b;
    e.sw = s;
    return e;
  }
  static Excitation laser(PulseSpec p) {
    p.validate();
    Excitation e;
    e.kind = Kind::laser_pulse;
    e.pulse = p;
    return e;
  }
  static Excitation uniform_vector_potential(PulseSpec time_profile) {
    time_profile.validate();
    Excitation e;
    e.kind = Kind::uniform_vector;
    e.pulse = time_profile;
    return e;
  }

  bool velocity_gauge() const {
    return kind == Kind::laser_pulse || kind == Kind::uniform_vector;
  }
  bool localized() const { return kind != Kind::uniform_vector; }

  // Spatial support [lo, hi]; empty (0,0) for none.
  std::pair<double, double> support() const {
    switch (kind) {
      case Kind::scalar_barrier:
        return {barrier.x_start, barrier.x_end()};
      case Kind::laser_pulse:
        return {pulse.x_start, pulse.x_end()};
      default:
        return {0.0, 0.0};
    }
  }

  // Time after which the excitation is identically zero (inf if never).
  double end_time() const {
    switch (kind) {
      case Kind::scalar_barrier:
        return sw.end_time();
      case Kind::laser_pulse:
      case Kind::uniform_vector:
        return pulse.tau;
      default:
        return 0.0;
    }
  }

  void check_inside_region2(const Grid& grid) const {
    if (kind == Kind::scalar_barrier || kind == Kind::laser_pulse) {
      auto [lo, hi] = support();
      grid.require_support_inside_region2(lo, hi);
    }
  }

  // Potential energy e*Phi(x,t) in eV at one site (scalar excitation only).
  double potential_energy(const PhysicalContext& ctx, double x, double t) const {
    if (kind != Kind::scalar_barrier) return 0.0;
    return ctx.charge * barrier_profile(barrier, x) * switch_envelope(sw, t);
  }

  // Vector potential in V fs / nm at one point.
  double vector_potential_at(double x, double t) const {
    switch (kind) {
      case Kind::laser_pulse:
        return vector_potential(pulse, x, t);
      case Kind::uniform_vector: {
        if (t <= 0.0 || t >= pulse.tau) return 0.0;
        const double st = std::sin(pi * t / pulse.tau);
        return pulse.a0() * st * st * std::sin(pulse.omega0() * t);
      }
      default:
        return 0.0;
    }
  }
};

}  // namespace qwire
