// Orchestrates a full propagation run: Crank-Nicolson during the excitation,
// optional spectral free flight afterwards, with probe traces, a decimated
// density raster and optional region-II density rows sampled on a shared
// uniform time grid.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qwire/observables.hpp"
#include "qwire/tdse.hpp"

namespace qwire {

enum class EnginePolicy { cn_only, cn_then_spectral };

struct SamplingPlan {
  double t_end = 0.0;
  double trace_dt = 0.25;            // resolved to a multiple of dt
  std::vector<double> probes;        // x positions for current traces
  std::vector<double> raster_times;  // snapped to the trace grid
  std::size_t raster_stride_x = 1;
  double density_row_dt = 0.0;       // 0 = no region-II rows
};

struct PropagationResult {
  double dt = 0.0;
  double trace_dt = 0.0;
  double handoff_time = std::numeric_limits<double>::quiet_NaN();
  std::vector<CurrentTrace> canonical;  // one per probe
  std::vector<CurrentTrace> physical;   // gauge-invariant current
  DensityMap map;                       // raster over the original box
  std::vector<double> row_times;        // region II density row times
  std::vector<std::vector<double>> region2_rho;
  std::vector<cdouble> handoff_delta;   // delta psi at the spectral handoff
  double cn_seconds = 0.0;
  double spectral_seconds = 0.0;
  std::size_t cn_steps = 0;
  std::size_t spectral_samples = 0;
};

inline PropagationResult propagate(const PhysicalContext& ctx, const Grid& grid,
                                   const Excitation& excitation,
                                   const PlaneWave& incident,
                                   EnginePolicy policy,
                                   const SamplingPlan& plan, double dt,
                                   std::size_t extension_factor = 10) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be > 0");
  if (!(plan.t_end > 0.0))
    throw std::invalid_argument("propagate: t_end must be > 0");

  PropagationResult res;
  res.dt = dt;
  const std::size_t per_sample =
      std::max<std::size_t>(1, std::size_t(std::llround(plan.trace_dt / dt)));
  res.trace_dt = double(per_sample) * dt;
  const std::size_t n_samples =
      std::size_t(std::floor(plan.t_end / res.trace_dt + 1e-9)) + 1;

  // Handoff sample: first trace sample at or after the end of the excitation.
  std::size_t handoff_sample = n_samples;  // = never
  if (policy == EnginePolicy::cn_then_spectral) {
    const double t_exc = excitation.end_time();
    if (!std::isfinite(t_exc))
      throw std::invalid_argument(
          "propagate: cn_then_spectral needs an excitation that ends");
    handoff_sample =
        std::size_t(std::ceil(t_exc / res.trace_dt - 1e-9));
    if (handoff_sample >= n_samples) handoff_sample = n_samples;
  }

  // Raster rows and region-II rows live on the trace grid.
  std::vector<bool> is_raster(n_samples, false);
  for (double t : plan.raster_times) {
    const std::size_t i =
        std::size_t(std::min<double>(std::max(0.0, std::round(t / res.trace_dt)),
                                     double(n_samples - 1)));
    is_raster[i] = true;
  }
  std::size_t rows_every = 0;
  if (plan.density_row_dt > 0.0)
    rows_every = std::max<std::size_t>(
        1, std::size_t(std::llround(plan.density_row_dt / res.trace_dt)));

  std::vector<std::size_t> probe_idx;
  for (double px : plan.probes) {
    if (!grid.contains(px))
      throw std::invalid_argument("propagate: probe outside the grid");
    probe_idx.push_back(grid.index_near(px));
  }
  res.canonical.resize(probe_idx.size());
  res.physical.resize(probe_idx.size());
  for (std::size_t p = 0; p < probe_idx.size(); ++p) {
    res.canonical[p].probe_x = grid.x(probe_idx[p]);
    res.physical[p].probe_x = res.canonical[p].probe_x;
  }
  for (std::size_t ix = 0; ix < grid.count; ix += plan.raster_stride_x)
    res.map.positions.push_back(grid.x(ix));

  auto sample_all = [&](const WaveField& f, std::size_t sample_index,
                        std::size_t index_offset) {
    const double t = f.time;
    for (std::size_t p = 0; p < probe_idx.size(); ++p) {
      const std::size_t j = probe_idx[p] + index_offset;
      res.canonical[p].times.push_back(t);
      res.canonical[p].values.push_back(current_canonical(f, j));
      res.physical[p].times.push_back(t);
      res.physical[p].values.push_back(
          current_gauge_invariant(f, excitation, j));
    }
    if (is_raster[sample_index]) {
      res.map.times.push_back(t);
      std::vector<double> row;
      row.reserve(res.map.positions.size());
      for (std::size_t ix = 0; ix < grid.count; ix += plan.raster_stride_x)
        row.push_back(density_at(f, ix + index_offset));
      res.map.rho.push_back(std::move(row));
    }
    if (rows_every > 0 && sample_index % rows_every == 0) {
      res.row_times.push_back(t);
      std::vector<double> row;
      row.reserve(grid.i2 - grid.i1 + 1);
      for (std::size_t ix = grid.i1; ix <= grid.i2; ++ix)
        row.push_back(density_at(f, ix + index_offset));
      res.region2_rho.push_back(std::move(row));
    }
  };

  const std::size_t cn_samples =
      (policy == EnginePolicy::cn_only) ? n_samples : handoff_sample + 1;
  const std::size_t cn_steps_total =
      (std::min(cn_samples, n_samples) - 1) * per_sample;

  CnOptions copt;
  copt.dt = dt;
  copt.boundary = BoundaryMode::transparent;
  copt.max_steps = cn_steps_total + 2;
  CnEngine engine(ctx, grid, excitation, incident, copt);

  const auto wall0 = std::chrono::steady_clock::now();
  sample_all(engine.field(), 0, 0);
  std::size_t sample = 1;
  for (; sample < std::min(cn_samples, n_samples); ++sample) {
    for (std::size_t s = 0; s < per_sample; ++s) engine.step();
    sample_all(engine.field(), sample, 0);
  }
  res.cn_steps = engine.steps_done();
  const auto wall1 = std::chrono::steady_clock::now();
  res.cn_seconds = std::chrono::duration<double>(wall1 - wall0).count();

  if (sample < n_samples) {
    // Hand off to spectral free flight on the same trace grid.  Probe sites
    // are watched directly (no transform); a full inverse FFT runs only for
    // samples that need the whole field.
    res.handoff_time = engine.field().time;
    res.handoff_delta = engine.field().delta;
    SpectralState spec =
        free_flight_extend(engine.field(), excitation, extension_factor);
    const std::size_t offset = spec.pad_left;
    std::vector<std::size_t> watch;
    for (std::size_t p : probe_idx)
      for (std::size_t d : {p + offset - 1, p + offset, p + offset + 1})
        watch.push_back(d);
    std::sort(watch.begin(), watch.end());
    watch.erase(std::unique(watch.begin(), watch.end()), watch.end());
    SpectralSampler sampler(std::move(spec), res.trace_dt, std::move(watch));
    for (; sample < n_samples; ++sample) {
      sampler.advance();
      const bool full = is_raster[sample] ||
                        (rows_every > 0 && sample % rows_every == 0);
      if (full) sampler.materialize();
      sample_all(sampler.current(), sample, offset);
      ++res.spectral_samples;
    }
    const auto wall2 = std::chrono::steady_clock::now();
    res.spectral_seconds = std::chrono::duration<double>(wall2 - wall1).count();
  }
  return res;
}

}  // namespace qwire
