// Time-dependent propagation of the scattered wave delta_psi, with the
// analytic incident plane wave carried alongside (psi = psi0 + delta_psi).
// Two engines: Crank-Nicolson with exact discrete transparent boundaries,
// and zero-padded spectral free flight for the interval after the excitation
// has ended.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qwire/core.hpp"
#include "qwire/fft.hpp"
#include "qwire/fields.hpp"
#include "qwire/linalg.hpp"
#include "qwire/tbc.hpp"

namespace qwire {

enum class Gauge { scalar, velocity };
enum class BoundaryMode { transparent, closed, periodic };

// delta holds the propagated part of the state.  With incident_amplitude = 1
// that is the scattered wave and the physical state is psi0 + delta; with
// incident_amplitude = 0 delta is itself the full wavefunction (used for
// closed/periodic whole-box runs and free wave-packet tests).
struct WaveField {
  PhysicalContext ctx;
  Grid grid;
  PlaneWave incident;
  Gauge gauge = Gauge::scalar;
  double incident_amplitude = 1.0;
  // Reference frequency of the carried plane wave.  The engines set it to
  // the lattice eigenfrequency 2 t'(1 - cos ka)/hbar of the spatial
  // discretisation, which makes e^{i(kx - omega_ref t)} an exact solution of
  // the discrete free problem (and converges to incident.omega as a -> 0).
  // 0 means "use incident.omega".
  double omega_ref = 0.0;
  double time = 0.0;
  std::vector<cdouble> delta;

  double reference_omega() const {
    return omega_ref > 0.0 ? omega_ref : incident.omega;
  }
  cdouble incident_at(std::size_t j) const {
    if (incident_amplitude == 0.0) return cdouble(0.0);
    const double phase = incident.k * grid.x(j) - reference_omega() * time;
    return incident_amplitude * cdouble(std::cos(phase), std::sin(phase));
  }
  cdouble total_at(std::size_t j) const { return incident_at(j) + delta[j]; }

  double delta_norm2() const {
    double s = 0.0;
    for (const auto& v : delta) s += std::norm(v);
    return s * grid.spacing;
  }
};

struct CnOptions {
  double dt = 0.0;
  BoundaryMode boundary = BoundaryMode::transparent;
  std::size_t max_steps = 0;  // required for transparent runs (kernel length)
  double incident_amplitude = 1.0;
};

// Default step size rule: (max onsite energy) * dt / hbar <= 0.1.
inline double default_time_step(const PhysicalContext& ctx, const Grid& grid,
                                double max_abs_potential = 0.0) {
  const double t_prime = hopping_energy(ctx, grid.spacing);
  return 0.1 * ctx.hbar / (2.0 * t_prime + std::abs(max_abs_potential));
}

class CnEngine {
 public:
  CnEngine(const PhysicalContext& ctx, const Grid& grid,
           const Excitation& excitation, const PlaneWave& incident,
           const CnOptions& options,
           std::span<const cdouble> initial_delta = {})
      : exc_(excitation), options_(options) {
    ctx.validate();
    grid.validate();
    if (!(options.dt > 0.0))
      throw std::invalid_argument("CnEngine: dt must be > 0");
    if (excitation.localized() && excitation.kind != Excitation::Kind::none)
      excitation.check_inside_region2(grid);
    if (excitation.kind == Excitation::Kind::uniform_vector) {
      if (options.boundary != BoundaryMode::periodic)
        throw std::invalid_argument(
            "CnEngine: a spatially uniform vector potential has no localized "
            "support and requires periodic boundaries");
      if (options.incident_amplitude != 0.0)
        throw std::invalid_argument(
            "CnEngine: uniform vector potential runs propagate the full "
            "wavefunction (incident_amplitude must be 0)");
    }

    field_.ctx = ctx;
    field_.grid = grid;
    field_.incident = incident;
    field_.gauge = excitation.velocity_gauge() ? Gauge::velocity : Gauge::scalar;
    field_.incident_amplitude = options.incident_amplitude;
    field_.time = 0.0;
    if (initial_delta.empty()) {
      field_.delta.assign(grid.count, cdouble(0.0));
    } else {
      if (initial_delta.size() != grid.count)
        throw std::invalid_argument("CnEngine: initial state size mismatch");
      field_.delta.assign(initial_delta.begin(), initial_delta.end());
    }

    n_ = grid.count;
    t_prime_ = hopping_energy(ctx, grid.spacing);
    field_.omega_ref =
        lattice_band_energy(t_prime_, incident.k * grid.spacing) / ctx.hbar;
    gamma_ = cdouble(0.0, options.dt / (2.0 * ctx.hbar));
    source_scale_ = cdouble(0.0, -options.dt / ctx.hbar);
    eta_ = ctx.charge * ctx.hbar / (4.0 * ctx.mass * grid.spacing);

    // Working window: the only sites with time-dependent matrix elements.
    // Localized excitations live strictly inside region II; a uniform vector
    // potential covers the whole ring.
    if (excitation.kind == Excitation::Kind::uniform_vector) {
      win_lo_ = 0;
      win_hi_ = grid.count - 1;
    } else {
      win_lo_ = grid.i1;
      win_hi_ = grid.i2;
    }
    const std::size_t w = win_hi_ - win_lo_ + 1;
    pot_now_.assign(w, 0.0);
    pot_next_.assign(w, 0.0);
    a_now_.assign(w, 0.0);
    a_next_.assign(w, 0.0);

    phase_x_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const double p = incident.k * grid.x(j);
      phase_x_[j] = cdouble(std::cos(p), std::sin(p));
    }
    if (exc_.kind == Excitation::Kind::scalar_barrier) {
      barrier_e_.resize(w);
      for (std::size_t j = 0; j < w; ++j)
        barrier_e_[j] =
            ctx.charge * barrier_profile(exc_.barrier, grid.x(win_lo_ + j));
    }
    sample_excitation(0.0, pot_now_, a_now_);

    diag_.resize(n_);
    rhs_.resize(n_);
    next_.resize(n_);
    if (field_.gauge == Gauge::velocity) {
      lower_.assign(n_ - 1, -gamma_ * t_prime_);
      upper_.assign(n_ - 1, -gamma_ * t_prime_);
    }

    if (options.boundary == BoundaryMode::transparent) {
      if (options.max_steps == 0)
        throw std::invalid_argument(
            "CnEngine: transparent boundaries need max_steps for the kernel");
      kernel_ = BoundaryKernel::make(t_prime_, options.dt, ctx.hbar,
                                     options.max_steps);
      conv_left_ = std::make_unique<FastConvolver>(
          std::span<const cdouble>(kernel_.s), options.max_steps + 1);
      conv_right_ = std::make_unique<FastConvolver>(
          std::span<const cdouble>(kernel_.s), options.max_steps + 1);
      conv_left_->push(field_.delta.front());
      conv_right_->push(field_.delta.back());
      ghost_left_ = kernel_.s[0] * field_.delta.front();
      ghost_right_ = kernel_.s[0] * field_.delta.back();
    }
  }

  const WaveField& field() const { return field_; }
  std::size_t steps_done() const { return step_; }
  double t_prime() const { return t_prime_; }
  double dt() const { return options_.dt; }
  const Excitation& excitation() const { return exc_; }

  void step() {
    const double dt = options_.dt;
    const double t0 = field_.time;
    const double t1 = t0 + dt;
    sample_excitation(t1, pot_next_, a_next_);

    const bool velocity = field_.gauge == Gauge::velocity;
    const cdouble diag_free = 1.0 + gamma_ * (2.0 * t_prime_);
    const cdouble off_free = -gamma_ * t_prime_;

    // Assemble diagonal of I + gamma*Hbar and the rhs (I - gamma*Hbar) delta.
    std::fill(diag_.begin(), diag_.end(), diag_free);
    if (velocity) {
      std::fill(lower_.begin(), lower_.end(), off_free);
      std::fill(upper_.begin(), upper_.end(), off_free);
      const double q = field_.ctx.charge;
      const double m = field_.ctx.mass;
      for (std::size_t j = win_lo_; j <= win_hi_; ++j) {
        const std::size_t r = j - win_lo_;
        const double a2 =
            0.5 * (a_now_[r] * a_now_[r] + a_next_[r] * a_next_[r]);
        diag_[j] += gamma_ * (q * q * a2 / (2.0 * m));
      }
      for (std::size_t j = win_lo_; j < win_hi_; ++j) {
        const std::size_t r = j - win_lo_;
        const double abar = 0.5 * (a_now_[r] + a_next_[r]);
        const double abar1 = 0.5 * (a_now_[r + 1] + a_next_[r + 1]);
        const cdouble cross = gamma_ * cdouble(0.0, eta_ * (abar + abar1));
        upper_[j] += cross;   // gamma * (+i eta (A_j + A_{j+1}))
        lower_[j] -= cross;   // gamma * (-i eta (A_j + A_{j+1}))
      }
    } else {
      for (std::size_t j = win_lo_; j <= win_hi_; ++j) {
        const std::size_t r = j - win_lo_;
        diag_[j] += gamma_ * (0.5 * (pot_now_[r] + pot_next_[r]));
      }
    }

    // rhs = (2 - (I + gamma Hbar)) delta - i dt/hbar * source_avg
    //     = (I - gamma Hbar) delta - ...
    const auto& d = field_.delta;
    if (velocity) {
      for (std::size_t j = 0; j < n_; ++j) {
        cdouble acc = (2.0 - diag_[j]) * d[j];
        if (j > 0) acc -= lower_[j - 1] * d[j - 1];
        if (j + 1 < n_) acc -= upper_[j] * d[j + 1];
        rhs_[j] = acc;
      }
    } else {
      for (std::size_t j = 0; j < n_; ++j) {
        cdouble acc = (2.0 - diag_[j]) * d[j];
        if (j > 0) acc -= off_free * d[j - 1];
        if (j + 1 < n_) acc -= off_free * d[j + 1];
        rhs_[j] = acc;
      }
    }

    add_source(t0, t1);

    switch (options_.boundary) {
      case BoundaryMode::closed:
        solve_closed(velocity);
        break;
      case BoundaryMode::periodic:
        solve_periodic(velocity);
        break;
      case BoundaryMode::transparent:
        solve_transparent(velocity);
        break;
    }

    field_.delta.swap(next_);
    field_.time = t1;
    ++step_;
    pot_now_.swap(pot_next_);
    a_now_.swap(a_next_);
  }

 private:
  void sample_excitation(double t, std::vector<double>& pot,
                         std::vector<double>& a) {
    switch (exc_.kind) {
      case Excitation::Kind::scalar_barrier: {
        const double chi = switch_envelope(exc_.sw, t);
        for (std::size_t r = 0; r < pot.size(); ++r)
          pot[r] = barrier_e_[r] * chi;
        break;
      }
      case Excitation::Kind::laser_pulse: {
        for (std::size_t r = 0; r < a.size(); ++r)
          a[r] = vector_potential(exc_.pulse, field_.grid.x(win_lo_ + r), t);
        break;
      }
      case Excitation::Kind::uniform_vector: {
        const double val = exc_.vector_potential_at(0.0, t);
        std::fill(a.begin(), a.end(), val);
        break;
      }
      case Excitation::Kind::none:
        break;
    }
  }

  // Trapezoidal source: -(i dt / hbar) * (S(t0) + S(t1)) / 2 added to rhs.
  // S = (H(t) - H0) psi0 with p psi0 = hbar k psi0 analytic and centered
  // differences on A.
  void add_source(double t0, double t1) {
    if (field_.incident_amplitude == 0.0 ||
        exc_.kind == Excitation::Kind::none)
      return;
    const double amp = field_.incident_amplitude;
    const double w = field_.reference_omega();
    const cdouble ph0 = std::polar(amp, -w * t0);
    const cdouble ph1 = std::polar(amp, -w * t1);
    if (exc_.kind == Excitation::Kind::scalar_barrier) {
      for (std::size_t j = win_lo_; j <= win_hi_; ++j) {
        const std::size_t r = j - win_lo_;
        const cdouble s_avg =
            0.5 * (pot_now_[r] * ph0 + pot_next_[r] * ph1) * phase_x_[j];
        rhs_[j] += source_scale_ * s_avg;
      }
      return;
    }
    // velocity gauge (localized pulse; the uniform case in periodic mode is
    // run without the incident split, amplitude = 0)
    const double q = field_.ctx.charge;
    const double m = field_.ctx.mass;
    const double hbar = field_.ctx.hbar;
    const double k = field_.incident.k;
    const double inv2a = 1.0 / (2.0 * field_.grid.spacing);
    auto coeff = [&](const std::vector<double>& a, std::size_t r) -> cdouble {
      // A vanishes at the window edges (support strictly inside region II),
      // so the centered difference can use zero beyond the window.
      const double am = r > 0 ? a[r - 1] : 0.0;
      const double ap = r + 1 < a.size() ? a[r + 1] : 0.0;
      const double da = (ap - am) * inv2a;
      const double av = a[r];
      return cdouble(-q * hbar * k / m * av + q * q * av * av / (2.0 * m),
                     q * hbar / (2.0 * m) * da);
    };
    for (std::size_t j = win_lo_; j <= win_hi_; ++j) {
      const std::size_t r = j - win_lo_;
      const cdouble s_avg =
          0.5 * (coeff(a_now_, r) * ph0 + coeff(a_next_, r) * ph1) *
          phase_x_[j];
      rhs_[j] += source_scale_ * s_avg;
    }
  }

  void solve_closed(bool velocity) {
    if (velocity) {
      solve_tridiagonal(lower_, diag_, upper_, rhs_, next_, ws_);
    } else {
      const cdouble off = -gamma_ * t_prime_;
      const_off_.assign(n_ - 1, off);
      solve_tridiagonal(const_off_, diag_, const_off_, rhs_, next_, ws_);
    }
  }

  void solve_periodic(bool velocity) {
    // Corner couplings close the ring; A at the edges is uniform or zero,
    // so the corner element mirrors the nearest-neighbour rule.
    cdouble corner_lo = -gamma_ * t_prime_;
    cdouble corner_hi = -gamma_ * t_prime_;
    if (velocity && exc_.kind == Excitation::Kind::uniform_vector) {
      const double abar = 0.5 * (a_now_[0] + a_next_[0]);
      const cdouble cross = gamma_ * cdouble(0.0, eta_ * 2.0 * abar);
      corner_lo -= cross;  // row 0, column n-1: "lower" sense
      corner_hi += cross;  // row n-1, column 0: "upper" sense
    }
    const auto& d = field_.delta;
    rhs_[0] -= corner_lo * d[n_ - 1];
    rhs_[n_ - 1] -= corner_hi * d[0];
    if (velocity) {
      solve_cyclic_tridiagonal(lower_, diag_, upper_, corner_lo, corner_hi,
                               rhs_, next_, ws_);
    } else {
      const cdouble off = -gamma_ * t_prime_;
      const_off_.assign(n_ - 1, off);
      solve_cyclic_tridiagonal(const_off_, diag_, const_off_, corner_lo,
                               corner_hi, rhs_, next_, ws_);
    }
  }

  void solve_transparent(bool velocity) {
    const cdouble off = -gamma_ * t_prime_;
    // History sums for the new step (exclude the unknown boundary values).
    const cdouble hist_l = conv_left_->head();
    const cdouble hist_r = conv_right_->head();
    // Ghost-site elimination: delta_ghost^{n+1} = s0 delta_b^{n+1} + hist.
    diag_[0] += off * kernel_.s[0];
    diag_[n_ - 1] += off * kernel_.s[0];
    rhs_[0] -= off * (hist_l + ghost_left_);
    rhs_[n_ - 1] -= off * (hist_r + ghost_right_);
    if (velocity) {
      solve_tridiagonal(lower_, diag_, upper_, rhs_, next_, ws_);
    } else {
      const_off_.assign(n_ - 1, off);
      solve_tridiagonal(const_off_, diag_, const_off_, rhs_, next_, ws_);
    }
    conv_left_->push(next_.front());
    conv_right_->push(next_.back());
    ghost_left_ = kernel_.s[0] * next_.front() + hist_l;
    ghost_right_ = kernel_.s[0] * next_.back() + hist_r;
  }

  Excitation exc_;
  CnOptions options_;
  WaveField field_;
  std::size_t n_ = 0;
  std::size_t step_ = 0;
  double t_prime_ = 0.0;
  double eta_ = 0.0;
  cdouble gamma_{0.0};
  cdouble source_scale_{0.0};
  std::size_t win_lo_ = 0, win_hi_ = 0;

  std::vector<double> pot_now_, pot_next_, a_now_, a_next_, barrier_e_;
  std::vector<cdouble> phase_x_;
  std::vector<cdouble> diag_, rhs_, next_, lower_, upper_, const_off_;
  TridiagonalWorkspace ws_;

  BoundaryKernel kernel_;
  std::unique_ptr<FastConvolver> conv_left_, conv_right_;
  cdouble ghost_left_{0.0}, ghost_right_{0.0};
};

// Zero-padded spectral representation for exact free flight after the
// excitation has ended.  Coefficients evolve with the lattice dispersion of
// the same spatial discretisation the CN engine uses, so the two engines
// describe one and the same semi-discrete problem.
struct SpectralState {
  PhysicalContext ctx;
  Grid original;
  Grid extended;
  PlaneWave incident;
  Gauge gauge = Gauge::scalar;
  double incident_amplitude = 1.0;
  double omega_ref = 0.0;
  std::size_t pad_left = 0;
  double handoff_time = 0.0;
  std::vector<cdouble> coeff;       // forward FFT of the padded delta
  std::vector<double> phase_rate;   // E_lat(k_m) / hbar

  std::size_t extended_count() const { return coeff.size(); }

  // delta on the extended grid at time t (>= handoff time).
  void sample_into(double t, Fft& fft, WaveField& out) const {
    const std::size_t m = coeff.size();
    if (fft.size() != m)
      throw std::invalid_argument("SpectralState: FFT size mismatch");
    auto in = fft.input();
    const double dtau = t - handoff_time;
    for (std::size_t i = 0; i < m; ++i)
      in[i] = coeff[i] * std::polar(1.0, -phase_rate[i] * dtau);
    fft.execute_backward();
    auto outbuf = fft.output();
    out.ctx = ctx;
    out.grid = extended;
    out.incident = incident;
    out.gauge = gauge;
    out.incident_amplitude = incident_amplitude;
    out.omega_ref = omega_ref;
    out.time = t;
    out.delta.resize(m);
    const double scale = 1.0 / double(m);
    for (std::size_t i = 0; i < m; ++i) out.delta[i] = outbuf[i] * scale;
  }
};

inline SpectralState free_flight_extend(const WaveField& field,
                                        const Excitation& excitation,
                                        std::size_t factor,
                                        double edge_fraction = 0.05,
                                        double edge_tolerance = 1e-8) {
  if (factor < 2)
    throw std::invalid_argument("free_flight_extend: factor must be >= 2");
  const double t_end = excitation.end_time();
  if (field.time < t_end - 1e-9)
    throw std::invalid_argument(
        "free_flight_extend: excitation still active at t = " +
        std::to_string(field.time) + " fs (ends at " + std::to_string(t_end) +
        " fs)");

  const std::size_t n = field.grid.count;
  const std::size_t band = std::max<std::size_t>(1, std::size_t(edge_fraction * double(n)));
  double edge2 = 0.0, total2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a2 = std::norm(field.delta[j]);
    total2 += a2;
    if (j < band || j >= n - band) edge2 += a2;
  }
  if (total2 > 0.0) {
    const double ratio = std::sqrt(edge2 / total2);
    if (ratio > edge_tolerance)
      throw NumericalError(
          "free_flight_extend: delta psi not negligible near the box edges "
          "(edge norm fraction " + std::to_string(ratio) + " exceeds " +
          std::to_string(edge_tolerance) + ")");
  }

  SpectralState s;
  s.ctx = field.ctx;
  s.original = field.grid;
  s.incident = field.incident;
  s.gauge = field.gauge;
  s.incident_amplitude = field.incident_amplitude;
  s.omega_ref = field.omega_ref;
  s.handoff_time = field.time;

  const std::size_t m = factor * n;
  s.pad_left = (m - n) / 2;
  Grid ext;
  ext.x0 = field.grid.x0 - double(s.pad_left) * field.grid.spacing;
  ext.spacing = field.grid.spacing;
  ext.count = m;
  ext.i1 = field.grid.i1 + s.pad_left;
  ext.i2 = field.grid.i2 + s.pad_left;
  ext.probes = field.grid.probes;
  ext.validate();
  s.extended = ext;

  std::vector<cdouble> padded(m, cdouble(0.0));
  std::copy(field.delta.begin(), field.delta.end(),
            padded.begin() + long(s.pad_left));
  Fft fft(m);
  s.coeff.resize(m);
  fft.forward(padded, s.coeff);

  const double t_prime = hopping_energy(field.ctx, field.grid.spacing);
  s.phase_rate.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double frac =
        (i <= m / 2) ? double(i) / double(m)
                     : (double(i) - double(m)) / double(m);
    const double ka = 2.0 * pi * frac;
    s.phase_rate[i] = lattice_band_energy(t_prime, ka) / field.ctx.hbar;
  }
  return s;
}

// Marches a spectral state over a uniform time grid.  Advancing rotates the
// coefficients and refreshes only a registered set of watch sites (direct
// dot products, no transform); materialize() runs one inverse FFT when the
// whole field is needed (raster rows, region II sampling).  The watch-site
// values and the transform agree to roundoff.
class SpectralSampler {
 public:
  SpectralSampler(SpectralState state, double dt,
                  std::vector<std::size_t> watch_sites = {})
      : state_(std::move(state)), dt_(dt), fft_(state_.extended_count()),
        cur_(state_.coeff), watch_(std::move(watch_sites)) {
    if (!(dt > 0.0))
      throw std::invalid_argument("SpectralSampler: dt must be > 0");
    const std::size_t m = cur_.size();
    const double scale = 1.0 / double(m);
    for (auto& c : cur_) c *= scale;  // fold the inverse-FFT normalization
    rot_.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      rot_[i] = std::polar(1.0, -state_.phase_rate[i] * dt);
    for (std::size_t s : watch_)
      if (s >= m)
        throw std::invalid_argument("SpectralSampler: watch site outside box");
    // Interleaved e^{+2 pi i h s / m} factors, one stream per pass.
    const std::size_t nw = watch_.size();
    phases_.resize(nw * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t s = 0; s < nw; ++s)
        phases_[i * nw + s] = std::polar(
            1.0, 2.0 * pi * double(i) * double(watch_[s]) / double(m));

    field_.ctx = state_.ctx;
    field_.grid = state_.extended;
    field_.incident = state_.incident;
    field_.gauge = state_.gauge;
    field_.incident_amplitude = state_.incident_amplitude;
    field_.omega_ref = state_.omega_ref;
    field_.time = state_.handoff_time;
    field_.delta.assign(m, cdouble(0.0));
    materialize();
  }

  const WaveField& current() const { return field_; }
  const SpectralState& state() const { return state_; }

  // One time step: rotate every coefficient and update the watch sites in a
  // single fused pass.
  void advance() {
    const std::size_t m = cur_.size();
    const std::size_t nw = watch_.size();
    if (nw == 0) {
      for (std::size_t i = 0; i < m; ++i) cur_[i] *= rot_[i];
    } else {
      std::vector<cdouble> acc(nw, cdouble(0.0));
      const cdouble* ph = phases_.data();
      for (std::size_t i = 0; i < m; ++i) {
        const cdouble c = cur_[i] * rot_[i];
        cur_[i] = c;
        for (std::size_t s = 0; s < nw; ++s) acc[s] += c * ph[i * nw + s];
      }
      for (std::size_t s = 0; s < nw; ++s) field_.delta[watch_[s]] = acc[s];
    }
    field_.time += dt_;
    materialized_ = false;
  }

  // Full inverse transform of the current coefficients.
  void materialize() {
    if (materialized_) return;
    auto in = fft_.input();
    std::copy(cur_.begin(), cur_.end(), in.begin());
    fft_.execute_backward();
    auto out = fft_.output();
    std::copy(out.begin(), out.end(), field_.delta.begin());
    materialized_ = true;
  }

 private:
  SpectralState state_;
  double dt_;
  Fft fft_;
  std::vector<cdouble> cur_, rot_, phases_;
  std::vector<std::size_t> watch_;
  WaveField field_;
  bool materialized_ = false;
};

}  // namespace qwire
