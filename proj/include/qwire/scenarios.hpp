// Scenario registry: config resolution, grid construction and the runners
// behind the CLI verbs (static-scan, calibrate, switch, pulse, superpose).
// Every run emits a resolved manifest that reproduces the outputs
// byte-identically when re-run.
#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "qwire/config.hpp"
#include "qwire/io.hpp"
#include "qwire/observables.hpp"
#include "qwire/propagate.hpp"
#include "qwire/static_negf.hpp"
#include "qwire/svg.hpp"

namespace qwire {

enum class ScenarioVerb { static_scan, calibrate, switch_on, pulse, superpose };

inline std::string verb_name(ScenarioVerb v) {
  switch (v) {
    case ScenarioVerb::static_scan: return "static-scan";
    case ScenarioVerb::calibrate: return "calibrate";
    case ScenarioVerb::switch_on: return "switch";
    case ScenarioVerb::pulse: return "pulse";
    case ScenarioVerb::superpose: return "superpose";
  }
  return "?";
}

namespace rundetail {

template <typename F>
inline void parallel_for_each(std::size_t n, F&& body) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const std::size_t workers = std::min<std::size_t>(n, hw);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::string list_to_string(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_roundtrip(v[i]);
  }
  return s;
}

}  // namespace rundetail

struct ScenarioConfig {
  ScenarioVerb verb = ScenarioVerb::pulse;
  PhysicalContext ctx;

  // [grid]
  double spacing = 0.05;
  std::optional<double> buffer;  // field-free span outside region II; auto
  double margin = 20.0;          // region II margin beyond the support

  // [incident]
  std::vector<double> energies_meV{54.0};

  // [barrier]
  bool has_barrier = false;
  double phi_max = 0.0;
  std::optional<double> calibrate_target;
  double barrier_length = 160.0;
  double barrier_x_start = 0.0;
  std::string barrier_shape = "eq6";  // eq6 | rectangular (oracle test hook)

  // [switch]
  SwitchSpec sw;

  // [pulse]
  bool has_pulse = false;
  double f0 = 1.0;
  double lambda0 = 800.0;
  std::optional<double> tau_explicit;
  int cycles = 10;
  std::vector<double> pulse_lengths{160.0};
  double pulse_x_start = 0.0;

  // [engine]
  std::string policy = "auto";  // auto | cn_only | cn_then_spectral
  std::optional<double> dt;
  std::size_t extension_factor = 10;
  std::optional<double> t_end;

  // [sampling]
  std::optional<double> trace_dt;
  std::size_t raster_count = 240;
  std::optional<double> raster_stride;
  std::optional<std::vector<double>> probes;
  double density_row_dt = 1.0;
  std::string spectrum_window = "none";
  bool spectrum_subtract_baseline = true;

  // [static]
  double scan_min_meV = 5.0;
  double scan_max_meV = 150.0;
  std::size_t scan_count = 60;
  std::optional<double> scattering_density_at_meV;

  // [superpose]
  std::vector<double> weights;

  // [distance]
  bool distance_l1 = false;

  // [output]
  std::string out_dir = "out";
  bool svg = false;
  bool emit_checkpoint = false;

  static ScenarioConfig load(ConfigMap& cm, ScenarioVerb verb) {
    ScenarioConfig c;
    c.verb = verb;
    c.ctx.hbar = cm.get_double("context.hbar_eV_fs", c.ctx.hbar);
    c.ctx.mass = cm.get_double("context.mass_eV_fs2_per_nm2", c.ctx.mass);
    c.ctx.charge = cm.get_double("context.charge_e", c.ctx.charge);
    c.ctx.validate();

    c.spacing = cm.get_double("grid.spacing_nm", c.spacing);
    c.buffer = cm.get_double_or_auto("grid.buffer_nm");
    c.margin = cm.get_double("grid.margin_nm", c.margin);
    if (!(c.spacing > 0.0)) throw ConfigError("grid.spacing_nm must be > 0");
    if (!(c.margin >= 2.0 * c.spacing))
      throw ConfigError("grid.margin_nm must be at least two lattice spacings");

    c.energies_meV = cm.get_list("incident.energies_meV", c.energies_meV);
    for (double e : c.energies_meV)
      if (!(e > 0.0)) throw ConfigError("incident.energies_meV must be > 0");

    const bool barrier_block = cm.section_present("barrier");
    const bool pulse_block = cm.section_present("pulse");
    const bool wants_barrier = verb == ScenarioVerb::static_scan ||
                               verb == ScenarioVerb::calibrate ||
                               verb == ScenarioVerb::switch_on;
    const bool wants_pulse =
        verb == ScenarioVerb::pulse || verb == ScenarioVerb::superpose;
    if (wants_barrier && pulse_block)
      throw ConfigError(verb_name(verb) +
                        " takes a [barrier] excitation, not [pulse]");
    if (wants_pulse && barrier_block)
      throw ConfigError(verb_name(verb) +
                        " takes a [pulse] excitation, not [barrier]");

    if (wants_barrier) {
      c.has_barrier = true;
      c.phi_max = cm.get_double("barrier.phi_max_V", c.phi_max);
      c.calibrate_target = cm.get_double_or_auto("barrier.calibrate_T");
      c.barrier_length = cm.get_double("barrier.length_nm", c.barrier_length);
      c.barrier_x_start = cm.get_double("barrier.x_start_nm", c.barrier_x_start);
      c.barrier_shape = cm.get_string("barrier.profile", c.barrier_shape);
      if (c.barrier_shape != "eq6" && c.barrier_shape != "rectangular")
        throw ConfigError("barrier.profile must be eq6 or rectangular");
      if (!(c.barrier_length > 0.0))
        throw ConfigError("barrier.length_nm must be > 0");
      if (verb == ScenarioVerb::calibrate && !c.calibrate_target)
        c.calibrate_target = 0.5;
      if (c.calibrate_target &&
          !(*c.calibrate_target > 0.0 && *c.calibrate_target <= 1.0))
        throw ConfigError("barrier.calibrate_T must be in (0, 1]");
    }
    if (verb == ScenarioVerb::switch_on) {
      c.sw.ramp_on = cm.get_double("switch.ramp_on_fs", 5.0);
      c.sw.plateau = cm.get_double_or_inf("switch.plateau_fs", std::nullopt);
      c.sw.ramp_off = cm.get_double("switch.ramp_off_fs", 5.0);
      c.sw.validate();
    }
    if (wants_pulse) {
      c.has_pulse = true;
      c.f0 = cm.get_double("pulse.f0_V_per_nm", c.f0);
      c.lambda0 = cm.get_double("pulse.lambda0_nm", c.lambda0);
      c.tau_explicit = cm.get_double_or_auto("pulse.tau_fs");
      c.cycles = int(cm.get_double("pulse.cycles", double(c.cycles)));
      c.pulse_lengths = cm.get_list("pulse.lengths_nm", c.pulse_lengths);
      c.pulse_x_start = cm.get_double("pulse.x_start_nm", c.pulse_x_start);
      if (c.cycles < 1) throw ConfigError("pulse.cycles must be >= 1");
      for (double l : c.pulse_lengths)
        if (!(l > 0.0)) throw ConfigError("pulse.lengths_nm must be > 0");
    }

    if (verb == ScenarioVerb::switch_on || wants_pulse) {
      c.policy = cm.get_string("engine.policy", c.policy);
      if (c.policy != "auto" && c.policy != "cn_only" &&
          c.policy != "cn_then_spectral")
        throw ConfigError("engine.policy must be auto|cn_only|cn_then_spectral");
      c.dt = cm.get_double_or_auto("engine.dt_fs");
      c.extension_factor =
          std::size_t(cm.get_double("engine.extension_factor", 10.0));
      if (c.extension_factor < 2)
        throw ConfigError("engine.extension_factor must be >= 2");
      c.t_end = cm.get_double_or_auto("engine.t_end_fs");

      c.trace_dt = cm.get_double_or_auto("sampling.trace_dt_fs");
      c.raster_count =
          std::size_t(cm.get_double("sampling.raster_count", 240.0));
      c.raster_stride = cm.get_double_or_auto("sampling.raster_stride_x");
      c.probes = cm.get_list_or_auto("sampling.probes_nm");
      c.density_row_dt = cm.get_double("sampling.density_row_dt_fs", 1.0);
      c.spectrum_window = cm.get_string("sampling.spectrum_window", "none");
      if (c.spectrum_window != "none" && c.spectrum_window != "hann")
        throw ConfigError("sampling.spectrum_window must be none or hann");
      c.spectrum_subtract_baseline =
          cm.get_bool("sampling.spectrum_subtract_baseline", true);
    }

    if (verb == ScenarioVerb::static_scan) {
      c.scan_min_meV = cm.get_double("static.energy_min_meV", c.scan_min_meV);
      c.scan_max_meV = cm.get_double("static.energy_max_meV", c.scan_max_meV);
      c.scan_count =
          std::size_t(cm.get_double("static.energy_count", double(c.scan_count)));
      c.scattering_density_at_meV =
          cm.get_double_or_auto("static.scattering_density_at_meV");
      if (!(c.scan_min_meV > 0.0) || !(c.scan_max_meV > c.scan_min_meV) ||
          c.scan_count < 2)
        throw ConfigError("static scan grid is malformed");
    }

    if (verb == ScenarioVerb::superpose) {
      c.weights = cm.get_list("superpose.weights", {});
      if (c.weights.size() != c.energies_meV.size())
        throw ConfigError(
            "superpose.weights must have one weight per incident energy");
    }
    if (verb == ScenarioVerb::switch_on)
      c.distance_l1 = cm.get_bool("distance.l1", false);

    c.out_dir = cm.get_string("output.dir", c.out_dir);
    c.svg = cm.get_bool("output.svg", false);
    c.emit_checkpoint = cm.get_bool("output.checkpoint", false);

    cm.require_all_consumed();
    return c;
  }

  // Canonical resolved dump; parsing it back reproduces this config exactly.
  std::string manifest_text() const {
    std::ostringstream os;
    auto num = [](double v) { return format_roundtrip(v); };
    auto opt = [&](const std::optional<double>& v) {
      return v ? format_roundtrip(*v) : std::string("auto");
    };
    os << "# resolved " << verb_name(verb) << " configuration\n";
    os << "[context]\n";
    os << "hbar_eV_fs = " << num(ctx.hbar) << "\n";
    os << "mass_eV_fs2_per_nm2 = " << num(ctx.mass) << "\n";
    os << "charge_e = " << num(ctx.charge) << "\n";
    os << "[grid]\n";
    os << "spacing_nm = " << num(spacing) << "\n";
    os << "buffer_nm = " << opt(buffer) << "\n";
    os << "margin_nm = " << num(margin) << "\n";
    os << "[incident]\n";
    os << "energies_meV = " << rundetail::list_to_string(energies_meV) << "\n";
    if (has_barrier) {
      os << "[barrier]\n";
      os << "phi_max_V = " << num(phi_max) << "\n";
      if (calibrate_target) os << "calibrate_T = " << num(*calibrate_target) << "\n";
      os << "length_nm = " << num(barrier_length) << "\n";
      os << "x_start_nm = " << num(barrier_x_start) << "\n";
      os << "profile = " << barrier_shape << "\n";
    }
    if (verb == ScenarioVerb::switch_on) {
      os << "[switch]\n";
      os << "ramp_on_fs = " << num(sw.ramp_on) << "\n";
      os << "plateau_fs = " << (sw.plateau ? num(*sw.plateau) : std::string("inf"))
         << "\n";
      os << "ramp_off_fs = " << num(sw.ramp_off) << "\n";
    }
    if (has_pulse) {
      os << "[pulse]\n";
      os << "f0_V_per_nm = " << num(f0) << "\n";
      os << "lambda0_nm = " << num(lambda0) << "\n";
      if (tau_explicit) os << "tau_fs = " << num(*tau_explicit) << "\n";
      os << "cycles = " << cycles << "\n";
      os << "lengths_nm = " << rundetail::list_to_string(pulse_lengths) << "\n";
      os << "x_start_nm = " << num(pulse_x_start) << "\n";
    }
    if (verb == ScenarioVerb::switch_on || has_pulse) {
      os << "[engine]\n";
      os << "policy = " << policy << "\n";
      os << "dt_fs = " << opt(dt) << "\n";
      os << "extension_factor = " << extension_factor << "\n";
      os << "t_end_fs = " << opt(t_end) << "\n";
      os << "[sampling]\n";
      os << "trace_dt_fs = " << opt(trace_dt) << "\n";
      os << "raster_count = " << raster_count << "\n";
      os << "raster_stride_x = " << opt(raster_stride) << "\n";
      os << "probes_nm = "
         << (probes ? rundetail::list_to_string(*probes) : std::string("auto"))
         << "\n";
      os << "density_row_dt_fs = " << num(density_row_dt) << "\n";
      os << "spectrum_window = " << spectrum_window << "\n";
      os << "spectrum_subtract_baseline = "
         << (spectrum_subtract_baseline ? "true" : "false") << "\n";
    }
    if (verb == ScenarioVerb::static_scan) {
      os << "[static]\n";
      os << "energy_min_meV = " << num(scan_min_meV) << "\n";
      os << "energy_max_meV = " << num(scan_max_meV) << "\n";
      os << "energy_count = " << scan_count << "\n";
      if (scattering_density_at_meV)
        os << "scattering_density_at_meV = " << num(*scattering_density_at_meV)
           << "\n";
    }
    if (verb == ScenarioVerb::superpose) {
      os << "[superpose]\n";
      os << "weights = " << rundetail::list_to_string(weights) << "\n";
    }
    if (verb == ScenarioVerb::switch_on) {
      os << "[distance]\n";
      os << "l1 = " << (distance_l1 ? "true" : "false") << "\n";
    }
    os << "[output]\n";
    os << "dir = " << out_dir << "\n";
    os << "svg = " << (svg ? "true" : "false") << "\n";
    os << "checkpoint = " << (emit_checkpoint ? "true" : "false") << "\n";
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Resolution helpers shared by the runners.

struct ResolvedEntry {
  double energy_meV = 0.0;
  double energy_eV = 0.0;
  PlaneWave incident;
  double support_lo = 0.0, support_hi = 0.0;
  Grid grid;
  double dt = 0.0;
  double t_end = 0.0;
  double trace_dt = 0.0;
  std::vector<double> probes;
  std::size_t raster_stride = 1;
  std::string suffix;
};

namespace rundetail {

inline Grid build_box(const ScenarioConfig& c, double support_lo,
                      double support_hi, double buffer) {
  const double a = c.spacing;
  const double x_lo = support_lo - c.margin - buffer;
  const double width = (support_hi - support_lo) + 2.0 * (c.margin + buffer);
  const std::size_t count = std::size_t(std::llround(width / a)) + 1;
  Grid g;
  g.x0 = x_lo;
  g.spacing = a;
  g.count = count;
  g.i1 = g.index_near(support_lo - c.margin);
  g.i2 = g.index_near(support_hi + c.margin);
  g.validate();
  return g;
}

inline std::string entry_suffix(bool tag_length, double length_nm,
                                bool tag_energy, double energy_meV) {
  std::string s;
  if (tag_length) s += "_L" + format_roundtrip(length_nm) + "nm";
  if (tag_energy) s += "_E" + format_roundtrip(energy_meV) + "meV";
  return s;
}

inline void maybe_log(std::ostream* log, const std::string& line) {
  if (log) *log << line << "\n";
}

inline std::filesystem::path out_path(const ScenarioConfig& c,
                                      const std::string& name) {
  return std::filesystem::path(c.out_dir) / name;
}

inline void write_manifest(const ScenarioConfig& c) {
  atomic_write_file(out_path(c, verb_name(c.verb) + "_manifest.cfg"),
                    c.manifest_text());
}

inline std::vector<double> sample_potential_for_shape(
    const ScenarioConfig& c, const PhysicalContext& ctx, const Grid& grid,
    const BarrierSpec& barrier) {
  if (c.barrier_shape == "rectangular") {
    // Sharp rectangle; effective width = (number of sites) * spacing, the
    // analytic-oracle convention.
    std::vector<double> v(grid.count, 0.0);
    for (std::size_t i = 0; i < grid.count; ++i) {
      const double x = grid.x(i);
      if (x >= barrier.x_start && x < barrier.x_start + barrier.length)
        v[i] = ctx.charge * barrier.phi_max;
    }
    v.front() = 0.0;
    v.back() = 0.0;
    return v;
  }
  return sample_barrier_potential(ctx, grid, barrier);
}

}  // namespace rundetail

// ---------------------------------------------------------------------------
// static-scan / calibrate

inline void run_static_scan(const ScenarioConfig& c, std::ostream* log = nullptr) {
  using namespace rundetail;
  if (!c.has_barrier)
    throw ConfigError("static-scan requires a [barrier] block");
  BarrierSpec barrier{c.phi_max, c.barrier_length, c.barrier_x_start};
  barrier.validate();
  const double buffer =
      c.buffer ? *c.buffer : std::max(0.5 * c.barrier_length, 40.0);
  Grid grid = build_box(c, barrier.x_start, barrier.x_end(), buffer);

  if (c.calibrate_target) {
    const double e0 = c.energies_meV.front() * 1e-3;
    CalibrationReport rep;
    barrier.phi_max = calibrate_barrier(c.ctx, grid, barrier, e0,
                                        *c.calibrate_target, 1e-6, &rep);
    std::vector<double> phi{rep.phi_max}, tv{rep.transmission}, ev{e0};
    const CsvColumn cols[3] = {
        {"energy_eV", &ev}, {"phi_max_V", &phi}, {"transmission", &tv}};
    write_csv(out_path(c, "calibration.csv"), cols);
    maybe_log(log, "calibrated phi_max = " + format_roundtrip(rep.phi_max) +
                       " V (T = " + format_roundtrip(rep.transmission) + ")");
  }

  const auto v = sample_potential_for_shape(c, c.ctx, grid, barrier);
  const auto h = build_hamiltonian(c.ctx, grid, v);

  std::vector<double> energies(c.scan_count);
  for (std::size_t i = 0; i < c.scan_count; ++i)
    energies[i] = (c.scan_min_meV +
                   (c.scan_max_meV - c.scan_min_meV) * double(i) /
                       double(c.scan_count - 1)) *
                  1e-3;
  TransmissionCurve curve = transmission_curve(h, energies);
  write_csv_two(out_path(c, "transmission_curve.csv"), "energy_eV",
                curve.energies, "transmission", curve.values);

  // Field profile export.
  std::vector<double> xs, phis;
  for (std::size_t i = 0; i < grid.count; ++i) {
    xs.push_back(grid.x(i));
    phis.push_back(c.barrier_shape == "rectangular" ? v[i] / c.ctx.charge
                                                    : barrier_profile(barrier, grid.x(i)));
  }
  write_csv_two(out_path(c, "barrier_profile.csv"), "x_nm", xs, "phi_V", phis);

  if (c.scattering_density_at_meV) {
    const double e = *c.scattering_density_at_meV * 1e-3;
    auto rho = scattering_density(h, e);
    write_csv_two(out_path(c, "rho_s.csv"), "x_nm", xs, "rho", rho);
  }
  if (c.svg) {
    const SvgSeries ser[1] = {{"T(E)", &curve.values}};
    SvgPlotOptions o;
    o.title = "Static transmission";
    o.xlabel = "E (eV)";
    o.ylabel = "T";
    svg_line_plot(out_path(c, "transmission_curve.svg"), curve.energies, ser, o);
  }
  write_manifest(c);
}

inline void run_calibrate(const ScenarioConfig& c, std::ostream* log = nullptr) {
  using namespace rundetail;
  if (!c.has_barrier) throw ConfigError("calibrate requires a [barrier] block");
  BarrierSpec shape{0.0, c.barrier_length, c.barrier_x_start};
  shape.validate();
  const double buffer =
      c.buffer ? *c.buffer : std::max(0.5 * c.barrier_length, 40.0);
  Grid grid = build_box(c, shape.x_start, shape.x_end(), buffer);
  const double target = c.calibrate_target.value_or(0.5);

  std::vector<double> ev, phis, ts;
  for (double emev : c.energies_meV) {
    CalibrationReport rep;
    calibrate_barrier(c.ctx, grid, shape, emev * 1e-3, target, 1e-6, &rep);
    ev.push_back(emev * 1e-3);
    phis.push_back(rep.phi_max);
    ts.push_back(rep.transmission);
    maybe_log(log, "E = " + format_roundtrip(emev) + " meV: phi_max = " +
                       format_roundtrip(rep.phi_max) + " V, T = " +
                       format_roundtrip(rep.transmission));
  }
  const CsvColumn cols[3] = {
      {"energy_eV", &ev}, {"phi_max_V", &phis}, {"transmission", &ts}};
  write_csv(out_path(c, "calibration.csv"), cols);
  write_manifest(c);
}

// ---------------------------------------------------------------------------
// switch

inline void run_switch(const ScenarioConfig& c, std::ostream* log = nullptr) {
  using namespace rundetail;
  if (!c.has_barrier) throw ConfigError("switch requires a [barrier] block");
  if (c.barrier_shape != "eq6")
    throw ConfigError("switch propagation supports the eq6 profile only");
  const bool tag_energy = c.energies_meV.size() > 1;
  const double buffer = c.buffer ? *c.buffer : 160.0;

  // chi(t) export once.
  {
    std::vector<double> ts, chis;
    const double t_hi = std::isfinite(c.sw.end_time())
                            ? c.sw.end_time() + c.sw.ramp_on
                            : 4.0 * c.sw.ramp_on;
    for (int i = 0; i <= 400; ++i) {
      const double t = t_hi * double(i) / 400.0;
      ts.push_back(t);
      chis.push_back(switch_envelope(c.sw, t));
    }
    write_csv_two(out_path(c, "chi_trace.csv"), "t_fs", ts, "chi", chis);
  }

  rundetail::parallel_for_each(c.energies_meV.size(), [&](std::size_t ie) {
    const double emev = c.energies_meV[ie];
    const double energy = emev * 1e-3;
    const PlaneWave pw = dispersion(c.ctx, wavenumber_from_energy(c.ctx, energy));
    const std::string suffix = entry_suffix(false, 0, tag_energy, emev);

    BarrierSpec barrier{c.phi_max, c.barrier_length, c.barrier_x_start};
    Grid grid = build_box(c, barrier.x_start, barrier.x_end(), buffer);

    // Static references are solved at the lattice energy of the incident
    // wavenumber, the energy the propagated reference wave actually carries
    // on this grid (identical to `energy` in the continuum limit).
    const double t_prime = hopping_energy(c.ctx, grid.spacing);
    const double energy_ref =
        lattice_band_energy(t_prime, pw.k * grid.spacing);

    if (c.calibrate_target) {
      CalibrationReport rep;
      barrier.phi_max = calibrate_barrier(c.ctx, grid, barrier, energy_ref,
                                          *c.calibrate_target, 1e-6, &rep);
      std::vector<double> ev{energy}, phi{rep.phi_max}, tv{rep.transmission};
      const CsvColumn cols[3] = {
          {"energy_eV", &ev}, {"phi_max_V", &phi}, {"transmission", &tv}};
      write_csv(out_path(c, "calibration" + suffix + ".csv"), cols);
    }

    // Steady-state reference on the same lattice.
    const auto v = sample_barrier_potential(c.ctx, grid, barrier);
    const auto h = build_hamiltonian(c.ctx, grid, v);
    const auto rho_s = scattering_density(h, energy_ref);
    {
      std::vector<double> xs(grid.count);
      for (std::size_t i = 0; i < grid.count; ++i) xs[i] = grid.x(i);
      write_csv_two(out_path(c, "rho_s" + suffix + ".csv"), "x_nm", xs, "rho",
                    rho_s);
      std::vector<double> phis(grid.count);
      for (std::size_t i = 0; i < grid.count; ++i)
        phis[i] = barrier_profile(barrier, grid.x(i));
      write_csv_two(out_path(c, "barrier_profile" + suffix + ".csv"), "x_nm",
                    xs, "phi_V", phis);
    }

    Excitation exc = Excitation::switched_barrier(barrier, c.sw);
    exc.check_inside_region2(grid);

    const double dt = c.dt ? *c.dt
                           : default_time_step(c.ctx, grid,
                                               c.ctx.charge * barrier.phi_max);
    // Long enough for the transients to leave region II and the interference
    // pattern to build, for transport-dominated barriers.
    const double region2_width = grid.x(grid.i2) - grid.x(grid.i1);
    const double t_end =
        c.t_end ? *c.t_end
                : c.sw.ramp_on + 2.5 * region2_width / pw.velocity;

    SamplingPlan plan;
    plan.t_end = t_end;
    plan.trace_dt = c.trace_dt ? *c.trace_dt : 1.0;
    plan.probes = c.probes ? *c.probes
                           : std::vector<double>{barrier.x_end() + 30.0};
    plan.raster_stride_x =
        c.raster_stride ? std::size_t(*c.raster_stride)
                        : std::max<std::size_t>(1, grid.count / 1000);
    for (std::size_t i = 0; i < c.raster_count; ++i)
      plan.raster_times.push_back(t_end * double(i) /
                                  double(c.raster_count - 1));
    plan.density_row_dt = c.density_row_dt;

    const EnginePolicy policy = (c.policy == "cn_then_spectral")
                                    ? EnginePolicy::cn_then_spectral
                                    : EnginePolicy::cn_only;
    PropagationResult res = propagate(c.ctx, grid, exc, pw, policy, plan, dt,
                                      c.extension_factor);

    // D(t) against the steady-state density over region II.
    std::vector<double> dcurve(res.row_times.size());
    std::span<const double> rho_s_window(rho_s.data() + grid.i1,
                                         grid.i2 - grid.i1 + 1);
    for (std::size_t it = 0; it < res.row_times.size(); ++it)
      dcurve[it] = distance_D(res.region2_rho[it], rho_s_window, grid.spacing,
                              c.distance_l1);
    write_csv_two(out_path(c, "distance" + suffix + ".csv"), "t_fs",
                  res.row_times, "D", dcurve);

    CurrentTrace ttrace = transmission_td(res.physical.front(), pw);
    write_csv_two(out_path(c, "transmission_trace" + suffix + ".csv"), "t_fs",
                  ttrace.times, "T", ttrace.values);
    write_csv_two(out_path(c, "trace" + suffix + ".csv"), "t_fs",
                  res.physical.front().times, "j_nm_per_fs",
                  res.physical.front().values);
    write_density_map_csv(out_path(c, "density_map" + suffix + ".csv"),
                          res.map);
    if (c.svg) {
      const SvgSeries dser[1] = {{"D(t)", &dcurve}};
      SvgPlotOptions o;
      o.title = "Distance to steady state";
      o.xlabel = "t (fs)";
      o.ylabel = "D (nm)";
      svg_line_plot(out_path(c, "distance" + suffix + ".svg"), res.row_times,
                    dser, o);
      svg_heatmap(out_path(c, "density_map" + suffix + ".svg"), res.map,
                  "Electron density");
    }
    maybe_log(log, "switch E=" + format_roundtrip(emev) + " meV done (" +
                       std::to_string(res.cn_steps) + " CN steps)");
  });
  write_manifest(c);
}

// ---------------------------------------------------------------------------
// pulse / superpose

namespace rundetail {

struct PulseEntryResult {
  CurrentTrace trace;
  Spectrum spectrum;
};

inline PulseEntryResult run_pulse_entry(const ScenarioConfig& c,
                                        double length_nm, double energy_meV,
                                        const std::string& suffix,
                                        bool write_files,
                                        std::ostream* log) {
  const double energy = energy_meV * 1e-3;
  const PlaneWave pw = dispersion(c.ctx, wavenumber_from_energy(c.ctx, energy));

  PulseSpec pulse;
  if (c.tau_explicit) {
    pulse.f0 = c.f0;
    pulse.lambda0 = c.lambda0;
    pulse.tau = *c.tau_explicit;
    pulse.length = length_nm;
    pulse.x_start = c.pulse_x_start;
  } else {
    pulse = PulseSpec::from_cycles(c.f0, c.lambda0, c.cycles, length_nm,
                                   c.pulse_x_start);
  }
  pulse.validate();

  const double buffer = c.buffer ? *c.buffer : 4.0 * length_nm;
  Grid grid = build_box(c, pulse.x_start, pulse.x_end(), buffer);
  Excitation exc = Excitation::laser(pulse);
  exc.check_inside_region2(grid);

  const double dt = c.dt ? *c.dt : default_time_step(c.ctx, grid);
  const double probe_default = pulse.x_start + 2.0 * length_nm;
  SamplingPlan plan;
  plan.probes =
      c.probes ? *c.probes : std::vector<double>{probe_default};
  const double far_probe =
      *std::max_element(plan.probes.begin(), plan.probes.end());
  plan.t_end = c.t_end ? *c.t_end
                       : pulse.tau + (far_probe - pulse.x_start) / pw.velocity +
                             5.0 * pulse.tau;
  plan.trace_dt = c.trace_dt ? *c.trace_dt : 0.5;  // 25 samples per cycle
  plan.raster_stride_x =
      c.raster_stride ? std::size_t(*c.raster_stride)
                      : std::max<std::size_t>(1, grid.count / 1000);
  for (std::size_t i = 0; i < c.raster_count; ++i)
    plan.raster_times.push_back(plan.t_end * double(i) /
                                double(c.raster_count - 1));
  const EnginePolicy policy = (c.policy == "cn_only")
                                  ? EnginePolicy::cn_only
                                  : EnginePolicy::cn_then_spectral;
  PropagationResult res =
      propagate(c.ctx, grid, exc, pw, policy, plan, dt, c.extension_factor);

  PowerSpectrumOptions sopt;
  sopt.subtract_baseline = c.spectrum_subtract_baseline;
  sopt.baseline = pw.velocity;
  sopt.window = c.spectrum_window == "hann" ? SpectrumWindow::hann
                                            : SpectrumWindow::none;
  PulseEntryResult out;
  out.trace = res.physical.front();
  out.spectrum = power_spectrum(out.trace, sopt);

  if (write_files) {
    write_csv_two(out_path(c, "trace" + suffix + ".csv"), "t_fs",
                  out.trace.times, "j_nm_per_fs", out.trace.values);
    write_csv_two(out_path(c, "spectrum" + suffix + ".csv"), "omega_per_fs",
                  out.spectrum.omegas, "power", out.spectrum.power);
    write_density_map_csv(out_path(c, "density_map" + suffix + ".csv"),
                          res.map);

    // Field exports: A and F versus t at the support centre, U_p versus x at
    // the envelope peak.
    std::vector<double> ts, as, fs;
    const double xc = pulse.x_start + 0.5 * pulse.length;
    for (int i = 0; i <= 800; ++i) {
      const double t = pulse.tau * double(i) / 800.0;
      ts.push_back(t);
      as.push_back(vector_potential(pulse, xc, t));
      fs.push_back(electric_field(pulse, xc, t));
    }
    write_csv_two(out_path(c, "vector_potential_trace" + suffix + ".csv"),
                  "t_fs", ts, "A_V_fs_per_nm", as);
    write_csv_two(out_path(c, "field_trace" + suffix + ".csv"), "t_fs", ts,
                  "F_V_per_nm", fs);
    std::vector<double> xs, ups;
    for (std::size_t i = 0; i < grid.count; i += plan.raster_stride_x) {
      xs.push_back(grid.x(i));
      ups.push_back(
          ponderomotive_profile(pulse, c.ctx, grid.x(i), 0.5 * pulse.tau));
    }
    write_csv_two(out_path(c, "ponderomotive_profile" + suffix + ".csv"),
                  "x_nm", xs, "Up_eV", ups);
    if (c.emit_checkpoint && !res.handoff_delta.empty())
      write_checkpoint(out_path(c, "checkpoint" + suffix + ".bin"),
                       res.handoff_delta, res.handoff_time);
    if (c.svg) {
      const SvgSeries tser[1] = {{"j(t)", &out.trace.values}};
      SvgPlotOptions o1;
      o1.title = "Current density at the probe";
      o1.xlabel = "t (fs)";
      o1.ylabel = "j (nm/fs)";
      svg_line_plot(out_path(c, "trace" + suffix + ".svg"), out.trace.times,
                    tser, o1);
      const SvgSeries sser[1] = {{"|j(w)|^2", &out.spectrum.power}};
      SvgPlotOptions o2;
      o2.title = "Power spectrum";
      o2.xlabel = "omega (1/fs)";
      o2.ylabel = "power";
      o2.log_y = true;
      svg_line_plot(out_path(c, "spectrum" + suffix + ".svg"),
                    out.spectrum.omegas, sser, o2);
      svg_heatmap(out_path(c, "density_map" + suffix + ".svg"), res.map,
                  "Electron density");
    }
  }
  maybe_log(log, "pulse L=" + format_roundtrip(length_nm) + " nm, E=" +
                     format_roundtrip(energy_meV) + " meV done (" +
                     std::to_string(res.cn_steps) + " CN steps, " +
                     std::to_string(res.spectral_samples) +
                     " spectral samples)");
  return out;
}

}  // namespace rundetail

inline void run_pulse(const ScenarioConfig& c, std::ostream* log = nullptr) {
  using namespace rundetail;
  if (!c.has_pulse) throw ConfigError("pulse requires a [pulse] block");
  const bool tag_l = c.pulse_lengths.size() > 1;
  const bool tag_e = c.energies_meV.size() > 1;
  struct Entry {
    double l, e;
    std::string suffix;
  };
  std::vector<Entry> entries;
  for (double l : c.pulse_lengths)
    for (double e : c.energies_meV)
      entries.push_back({l, e, entry_suffix(tag_l, l, tag_e, e)});
  parallel_for_each(entries.size(), [&](std::size_t i) {
    run_pulse_entry(c, entries[i].l, entries[i].e, entries[i].suffix, true, log);
  });
  write_manifest(c);
}

inline void run_superpose(const ScenarioConfig& c, std::ostream* log = nullptr) {
  using namespace rundetail;
  if (!c.has_pulse) throw ConfigError("superpose requires a [pulse] block");
  const double length = c.pulse_lengths.front();

  // Shared geometry and time grid: resolve t_end over the slowest entry.
  ScenarioConfig shared = c;
  if (!shared.t_end) {
    double t_end = 0.0;
    for (double emev : c.energies_meV) {
      const PlaneWave pw =
          dispersion(c.ctx, wavenumber_from_energy(c.ctx, emev * 1e-3));
      PulseSpec p = c.tau_explicit
                        ? PulseSpec{c.f0, c.lambda0, *c.tau_explicit, length,
                                    c.pulse_x_start}
                        : PulseSpec::from_cycles(c.f0, c.lambda0, c.cycles,
                                                 length, c.pulse_x_start);
      const double probe = c.probes ? c.probes->front()
                                    : p.x_start + 2.0 * length;
      t_end = std::max(t_end,
                       p.tau + (probe - p.x_start) / pw.velocity + 5.0 * p.tau);
    }
    shared.t_end = t_end;
  }

  std::vector<CurrentTrace> traces(c.energies_meV.size());
  parallel_for_each(c.energies_meV.size(), [&](std::size_t i) {
    const std::string suffix =
        entry_suffix(false, 0, true, c.energies_meV[i]);
    traces[i] =
        run_pulse_entry(shared, length, c.energies_meV[i], suffix, true, log)
            .trace;
  });
  CurrentTrace combined = superpose_currents(traces, c.weights);
  write_csv_two(out_path(c, "trace_combined.csv"), "t_fs", combined.times,
                "j_nm_per_fs", combined.values);
  if (c.svg) {
    const SvgSeries ser[1] = {{"j(t)", &combined.values}};
    SvgPlotOptions o;
    o.title = "Superposed current";
    o.xlabel = "t (fs)";
    o.ylabel = "j (nm/fs)";
    svg_line_plot(out_path(c, "trace_combined.svg"), combined.times, ser, o);
  }
  write_manifest(c);
}

inline void run_scenario(const ScenarioConfig& c, std::ostream* log = nullptr) {
  std::filesystem::create_directories(c.out_dir);
  switch (c.verb) {
    case ScenarioVerb::static_scan: run_static_scan(c, log); break;
    case ScenarioVerb::calibrate: run_calibrate(c, log); break;
    case ScenarioVerb::switch_on: run_switch(c, log); break;
    case ScenarioVerb::pulse: run_pulse(c, log); break;
    case ScenarioVerb::superpose: run_superpose(c, log); break;
  }
}

}  // namespace qwire
