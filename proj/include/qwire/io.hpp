// Deterministic file output: fixed-format floats (9 significant digits,
// scientific), CSV writers, the flat binary checkpoint record and atomic
// write-then-rename file creation.
#pragma once

#include <charconv>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qwire/linalg.hpp"

namespace qwire {

// 9 significant digits, scientific; the one float format used in data files.
inline std::string format_sci(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof(buf), v,
                         std::chars_format::scientific, 8);
  if (r.ec != std::errc())
    throw std::runtime_error("format_sci: conversion failed");
  return std::string(buf, r.ptr);
}

// Shortest representation that parses back to the identical double; used in
// config manifests.
inline std::string format_roundtrip(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  if (r.ec != std::errc())
    throw std::runtime_error("format_roundtrip: conversion failed");
  return std::string(buf, r.ptr);
}

inline void atomic_write_file(const std::filesystem::path& path,
                              std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("atomic_write_file: cannot open " +
                               tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("atomic_write_file: short write");
  }
  fs::rename(tmp, path);
}

struct CsvColumn {
  std::string name;
  const std::vector<double>* data = nullptr;
};

inline void write_csv(const std::filesystem::path& path,
                      std::span<const CsvColumn> columns) {
  if (columns.empty()) throw std::invalid_argument("write_csv: no columns");
  const std::size_t rows = columns[0].data->size();
  std::string body;
  body.reserve(rows * columns.size() * 18 + 64);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].data->size() != rows)
      throw std::invalid_argument("write_csv: ragged columns");
    if (c) body += ',';
    body += columns[c].name;
  }
  body += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) body += ',';
      body += format_sci((*columns[c].data)[r]);
    }
    body += '\n';
  }
  atomic_write_file(path, body);
}

inline void write_csv_two(const std::filesystem::path& path,
                          const std::string& name_a,
                          const std::vector<double>& a,
                          const std::string& name_b,
                          const std::vector<double>& b) {
  const CsvColumn cols[2] = {{name_a, &a}, {name_b, &b}};
  write_csv(path, cols);
}

// Raster rows flattened to (t_fs, x_nm, rho) triples.
template <typename Map>
inline void write_density_map_csv(const std::filesystem::path& path,
                                  const Map& map) {
  std::string body = "t_fs,x_nm,rho\n";
  body.reserve(map.times.size() * map.positions.size() * 40 + 16);
  for (std::size_t it = 0; it < map.times.size(); ++it) {
    const std::string ts = format_sci(map.times[it]);
    for (std::size_t ix = 0; ix < map.positions.size(); ++ix) {
      body += ts;
      body += ',';
      body += format_sci(map.positions[ix]);
      body += ',';
      body += format_sci(map.rho[it][ix]);
      body += '\n';
    }
  }
  atomic_write_file(path, body);
}

// Checkpoint record: site count (u64), time in fs (f64), then interleaved
// re/im pairs, all little-endian 64-bit.
inline void write_checkpoint(const std::filesystem::path& path,
                             std::span<const cdouble> delta, double time) {
  static_assert(sizeof(double) == 8);
  std::string buf;
  buf.resize(8 + 8 + delta.size() * 16);
  const std::uint64_t n = delta.size();
  std::memcpy(buf.data(), &n, 8);
  std::memcpy(buf.data() + 8, &time, 8);
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double re = delta[i].real(), im = delta[i].imag();
    std::memcpy(buf.data() + 16 + 16 * i, &re, 8);
    std::memcpy(buf.data() + 24 + 16 * i, &im, 8);
  }
  atomic_write_file(path, buf);
}

inline std::pair<std::vector<cdouble>, double> read_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_checkpoint: cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 16)
    throw std::runtime_error("read_checkpoint: truncated header");
  std::uint64_t n = 0;
  double time = 0.0;
  std::memcpy(&n, buf.data(), 8);
  std::memcpy(&time, buf.data() + 8, 8);
  if (buf.size() != 16 + n * 16)
    throw std::runtime_error("read_checkpoint: size mismatch");
  std::vector<cdouble> delta(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    double re = 0.0, im = 0.0;
    std::memcpy(&re, buf.data() + 16 + 16 * i, 8);
    std::memcpy(&im, buf.data() + 24 + 16 * i, 8);
    delta[i] = cdouble(re, im);
  }
  return {std::move(delta), time};
}

}  // namespace qwire
