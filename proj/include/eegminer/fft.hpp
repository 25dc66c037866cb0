#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace eegminer::fft {

// FFTW-backed transforms under one fixed convention:
//
//   forward:  X_k = sum_t x_t e^{-i 2 pi k t / n}     (unnormalized)
//   inverse:  x_t = (1/n) sum_k X_k e^{+i 2 pi k t / n}
//
// The FFTW planner is a global resource and not thread-safe; plan creation is
// serialized. Plans and their scratch buffers are cached per thread, so
// concurrent transforms on different threads never share state.

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanSet {
  std::size_t n = 0;
  double* rbuf = nullptr;        // n reals
  fftw_complex* cin = nullptr;   // n complex
  fftw_complex* cout = nullptr;  // n complex

  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit PlanSet(std::size_t n_) : n(n_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    rbuf = fftw_alloc_real(n);
    cin = fftw_alloc_complex(n);
    cout = fftw_alloc_complex(n);
    if (!rbuf || !cin || !cout) throw std::bad_alloc();
    r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), rbuf, cout, FFTW_ESTIMATE);
    c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), cin, rbuf, FFTW_ESTIMATE);
    fwd = fftw_plan_dft_1d(static_cast<int>(n), cin, cout, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(n), cin, cout, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!r2c || !c2r || !fwd || !bwd) throw std::runtime_error("fft: plan creation failed");
  }

  PlanSet(const PlanSet&) = delete;
  PlanSet& operator=(const PlanSet&) = delete;

  ~PlanSet() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    fftw_free(rbuf);
    fftw_free(cin);
    fftw_free(cout);
  }
};

inline PlanSet& plans_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<PlanSet>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<PlanSet>(n);
  return *slot;
}

}  // namespace detail

namespace detail {

inline void copy_out(const fftw_complex* src, std::size_t count, std::complex<double>* dst,
                     double scale = 1.0) {
  for (std::size_t k = 0; k < count; ++k)
    dst[k] = std::complex<double>(src[k][0] * scale, src[k][1] * scale);
}

inline void copy_in(const std::complex<double>* src, std::size_t count, fftw_complex* dst) {
  for (std::size_t k = 0; k < count; ++k) {
    dst[k][0] = src[k].real();
    dst[k][1] = src[k].imag();
  }
}

}  // namespace detail

// Real signal -> one-sided spectrum (n/2 + 1 bins), unnormalized.
inline void rfft(const double* in, std::size_t n, std::complex<double>* out) {
  auto& p = detail::plans_for(n);
  std::copy(in, in + n, p.rbuf);
  fftw_execute(p.r2c);
  detail::copy_out(p.cout, n / 2 + 1, out);
}

// One-sided spectrum (n/2 + 1 bins) -> real signal of length n, scaled 1/n.
inline void irfft(const std::complex<double>* in, std::size_t n, double* out) {
  auto& p = detail::plans_for(n);
  detail::copy_in(in, n / 2 + 1, p.cin);
  fftw_execute(p.c2r);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = p.rbuf[t] * scale;
}

// Complex forward transform (e^{-i 2 pi k t / n}), unnormalized.
inline void cfft(const std::complex<double>* in, std::size_t n, std::complex<double>* out) {
  auto& p = detail::plans_for(n);
  detail::copy_in(in, n, p.cin);
  fftw_execute(p.fwd);
  detail::copy_out(p.cout, n, out);
}

// Complex inverse transform, scaled 1/n.
inline void icfft(const std::complex<double>* in, std::size_t n, std::complex<double>* out) {
  auto& p = detail::plans_for(n);
  detail::copy_in(in, n, p.cin);
  fftw_execute(p.bwd);
  detail::copy_out(p.cout, n, out, 1.0 / static_cast<double>(n));
}

}  // namespace eegminer::fft
