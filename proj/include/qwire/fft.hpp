// Thin RAII wrapper around FFTW complex transforms.  Plan creation goes
// through a global mutex (the FFTW planner is not thread safe); execution on
// private buffers is.
#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "qwire/linalg.hpp"

namespace qwire {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n), in_(n), out_(n) {
    if (n == 0) throw std::invalid_argument("Fft: size must be > 0");
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_1d(int(n), reinterpret_cast<fftw_complex*>(in_.data()),
                            reinterpret_cast<fftw_complex*>(out_.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(int(n), reinterpret_cast<fftw_complex*>(in_.data()),
                            reinterpret_cast<fftw_complex*>(out_.data()),
                            FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw std::runtime_error("Fft: planner failed");
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return n_; }

  // Unnormalized sum_j in[j] e^{-2 pi i jk/n}.
  void forward(std::span<const cdouble> in, std::span<cdouble> out) {
    run(fwd_, in, out);
  }
  // Unnormalized inverse; divide by n to invert forward().
  void backward(std::span<const cdouble> in, std::span<cdouble> out) {
    run(bwd_, in, out);
  }

  // Zero-copy path: fill input(), call execute_*(), read output().
  std::span<cdouble> input() { return in_; }
  std::span<const cdouble> output() const { return out_; }
  void execute_forward() { fftw_execute(fwd_); }
  void execute_backward() { fftw_execute(bwd_); }

 private:
  void run(fftw_plan plan, std::span<const cdouble> in, std::span<cdouble> out) {
    if (in.size() != n_ || out.size() != n_)
      throw std::invalid_argument("Fft: buffer size mismatch");
    std::copy(in.begin(), in.end(), in_.begin());
    fftw_execute(plan);
    std::copy(out_.begin(), out_.end(), out.begin());
  }

  std::size_t n_;
  std::vector<cdouble> in_, out_;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace qwire
