// Discrete transparent boundary condition for the Crank-Nicolson free
// lattice, plus the segmented FFT convolution that keeps the boundary memory
// integral affordable over long runs.
//
// Exterior elimination: with lambda = dt t' / (2 hbar), the Z-transform of
// the free CN exterior obeys
//   psi_{j+1} - (2 + mu) psi_j + psi_{j-1} = 0,
//   mu(z) = -i (z-1) / (lambda (z+1)),
// and the decaying root alpha(z) gives the exact ghost-site update
//   psi^{n}_{ghost} = sum_{m=0..n} s_m psi^{n-m}_{boundary},
// where alpha(w) = sum_m s_m w^m (w = 1/z) satisfies
//   lambda(1+w) alpha^2 - [(2 lambda - i) + (2 lambda + i) w] alpha
//     + lambda(1+w) = 0.
// Writing alpha = (-Q - S)/(2P) with S = sqrt(Q^2 - 4 P R) reduces the series
// to a three-term linear recurrence for S because
//   S^2 = D(w) = -(1+4 i lambda) + 2 w - (1-4 i lambda) w^2
// is a plain quadratic: 2 D S' = D' S.  Both branch points of D sit on the
// unit circle, so the coefficients decay like m^{-3/2} and the recurrence is
// only algebraically sensitive to roundoff.
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "qwire/fft.hpp"
#include "qwire/linalg.hpp"

namespace qwire {

struct BoundaryKernel {
  double lambda = 0.0;
  std::vector<cdouble> s;  // s[0..max_steps]

  static BoundaryKernel make(double t_prime, double dt, double hbar,
                             std::size_t max_steps) {
    if (!(t_prime > 0.0) || !(dt > 0.0) || !(hbar > 0.0))
      throw std::invalid_argument("BoundaryKernel: need positive t', dt, hbar");
    BoundaryKernel k;
    k.lambda = dt * t_prime / (2.0 * hbar);
    const double l = k.lambda;
    const cdouble i_unit(0.0, 1.0);
    const cdouble d0 = -(1.0 + 4.0 * i_unit * l);
    const cdouble d1 = 2.0;
    const cdouble d2 = -(1.0 - 4.0 * i_unit * l);
    const cdouble q0 = -(cdouble(2.0 * l) - i_unit);
    const cdouble q1 = -(cdouble(2.0 * l) + i_unit);

    // Branch of sqrt(d0) making |s_0| < 1 (the decaying exterior root).
    cdouble s_root = std::sqrt(d0);
    if (std::abs(-q0 - s_root) > std::abs(-q0 + s_root)) s_root = -s_root;

    const std::size_t m_max = max_steps;
    std::vector<cdouble> S(m_max + 2);
    S[0] = s_root;
    if (m_max >= 1) S[1] = d1 * S[0] / (2.0 * d0);
    for (std::size_t m = 1; m + 1 <= m_max; ++m) {
      // from 2 D S' = D' S:
      S[m + 1] = (d1 * (1.0 - 2.0 * double(m)) * S[m] +
                  2.0 * d2 * (2.0 - double(m)) * S[m - 1]) /
                 (2.0 * d0 * double(m + 1));
    }

    // 2 lambda (1+w) alpha = -Q(w) - S(w)  =>  s_m = -s_{m-1} - (q_m + S_m)/(2 lambda)
    k.s.resize(m_max + 1);
    k.s[0] = (-q0 - S[0]) / (2.0 * l);
    if (m_max >= 1) k.s[1] = -k.s[0] - (q1 + S[1]) / (2.0 * l);
    for (std::size_t m = 2; m <= m_max; ++m)
      k.s[m] = -k.s[m - 1] - S[m] / (2.0 * l);

    if (!(std::abs(k.s[0]) < 1.0))
      throw NumericalError("BoundaryKernel: wrong branch, |s_0| >= 1");
    return k;
  }
};

// Running convolution y_q = sum_{m=1..q} s_m x_{q-m} evaluated exactly.
// Lags [1..direct] are summed directly from a ring of recent inputs; longer
// lags are covered by uniformly partitioned FFT blocks on three size tiers,
// so the per-step cost stays polylogarithmic in the step count.
class FastConvolver {
 public:
  FastConvolver(std::span<const cdouble> kernel, std::size_t max_steps,
                std::size_t direct = 128)
      : kernel_(kernel.begin(), kernel.end()),
        max_steps_(max_steps),
        direct_(direct),
        recent_(2 * direct, cdouble(0.0)) {
    // max lag ever needed is pushes-1, so the kernel must reach index
    // max_steps_-1 at least.
    if (kernel_.size() < max_steps_)
      throw std::invalid_argument("FastConvolver: kernel shorter than max_steps");
    // Tier layout: (direct, direct + 15 P1], (.., + 15 P2], (.., open).
    std::size_t lag = direct_;
    const std::size_t p1 = direct_;
    tiers_.emplace_back(new Tier(kernel_, p1, lag, 15));
    lag += 15 * p1;
    const std::size_t p2 = 16 * p1;
    tiers_.emplace_back(new Tier(kernel_, p2, lag, 15));
    lag += 15 * p2;
    const std::size_t p3 = 16 * p2;
    tiers_.emplace_back(new Tier(kernel_, p3, lag, 0));  // unbounded
  }

  std::size_t pushed() const { return pushed_; }

  // Convolution value for the step about to be computed (q = pushed()).
  // Idempotent until the next push.
  cdouble head() {
    const std::size_t q = pushed_;
    if (head_valid_ && head_q_ == q) return head_value_;
    cdouble acc(0.0);
    const std::size_t m_hi = std::min(direct_, q);
    for (std::size_t m = 1; m <= m_hi; ++m)
      acc += kernel_[m] * recent_[(q - m) % recent_.size()];
    for (auto& t : tiers_) acc += t->pending(q);
    head_q_ = q;
    head_value_ = acc;
    head_valid_ = true;
    return acc;
  }

  void push(cdouble x) {
    if (pushed_ >= max_steps_)
      throw NumericalError("FastConvolver: exceeded planned step count");
    head();  // drain the tier rings for this step even if nobody asked
    recent_[pushed_ % recent_.size()] = x;
    for (auto& t : tiers_) t->push(x);
    ++pushed_;
    head_valid_ = false;
  }

 private:
  // One uniformly partitioned tier covering kernel lags
  // (lag_offset, lag_offset + n_segments * block] (open ended if n_segments=0).
  struct Tier {
    Tier(const std::vector<cdouble>& kernel, std::size_t block,
         std::size_t lag_offset, std::size_t n_segments)
        : P(block), L(lag_offset), fft(2 * block),
          pending_ring(lag_offset + 2 * block + 2, cdouble(0.0)),
          staging(block) {
      // Precompute spectra of kernel slices s[L + sigma P + 1 .. L + (sigma+1) P].
      std::size_t max_sigma =
          n_segments > 0 ? n_segments
                         : (kernel.size() > L ? (kernel.size() - L + P - 1) / P
                                              : 0);
      seg_spectra.reserve(max_sigma);
      std::vector<cdouble> buf(2 * P, cdouble(0.0));
      for (std::size_t sigma = 0; sigma < max_sigma; ++sigma) {
        std::fill(buf.begin(), buf.end(), cdouble(0.0));
        bool any = false;
        for (std::size_t d = 0; d < P; ++d) {
          const std::size_t idx = L + sigma * P + 1 + d;
          if (idx < kernel.size()) {
            buf[d] = kernel[idx];
            any = true;
          }
        }
        if (!any && n_segments == 0) break;
        seg_spectra.emplace_back(2 * P);
        fft.forward(buf, seg_spectra.back());
      }
    }

    void push(cdouble x) {
      staging[fill++] = x;
      ++count;
      if (fill == P) {
        complete_block();  // consumes staging[0..P)
        fill = 0;
      }
    }

    // Contribution of this tier to output index q, consumed destructively.
    cdouble pending(std::size_t q) {
      cdouble& slot = pending_ring[q % pending_ring.size()];
      const cdouble v = slot;
      slot = cdouble(0.0);
      return v;
    }

    void complete_block() {
      // Block b = count/P - 1 just completed. Accumulate in frequency domain
      // sum_sigma K_sigma * X_{b-sigma}, one inverse FFT, spread into pending.
      const std::size_t b = count / P - 1;
      std::vector<cdouble> spec(2 * P, cdouble(0.0));
      std::vector<cdouble> padded(2 * P, cdouble(0.0));
      std::copy(staging.begin(), staging.end(), padded.begin());
      fft.forward(padded, spec);
      block_spectra.push_back(std::move(spec));

      std::vector<cdouble> acc(2 * P, cdouble(0.0));
      bool nonzero = false;
      for (std::size_t sigma = 0; sigma < seg_spectra.size(); ++sigma) {
        if (sigma > b) break;
        const auto& xs = block_spectra[b - sigma];
        const auto& ks = seg_spectra[sigma];
        for (std::size_t i = 0; i < 2 * P; ++i) acc[i] += ks[i] * xs[i];
        nonzero = true;
      }
      if (!nonzero) return;
      std::vector<cdouble> conv(2 * P);
      fft.backward(acc, conv);
      const double scale = 1.0 / double(2 * P);
      // Outputs q = b P + L + 1 + i for i in [0, 2P-2].
      const std::size_t q0 = b * P + L + 1;
      for (std::size_t i = 0; i + 1 < 2 * P; ++i)
        pending_ring[(q0 + i) % pending_ring.size()] += conv[i] * scale;
    }

    std::size_t P;
    std::size_t L;
    Fft fft;
    std::vector<std::vector<cdouble>> seg_spectra;
    std::vector<std::vector<cdouble>> block_spectra;
    std::vector<cdouble> pending_ring;
    std::vector<cdouble> staging;
    std::size_t fill = 0;
    std::size_t count = 0;
  };

  std::vector<cdouble> kernel_;
  std::size_t max_steps_;
  std::size_t direct_;
  std::vector<cdouble> recent_;
  std::vector<std::unique_ptr<Tier>> tiers_;
  std::size_t pushed_ = 0;
  std::size_t head_q_ = 0;
  cdouble head_value_{0.0};
  bool head_valid_ = false;
};

}  // namespace qwire
