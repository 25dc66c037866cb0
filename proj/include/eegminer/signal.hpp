#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eegminer/fft.hpp"
#include "eegminer/types.hpp"

namespace eegminer {

// One standardized multichannel recording window.
struct TrialTensor {
  Mat data;  // [channels x samples]
  double fs = 0.0;
  int label = 0;  // binary class {0, 1}
  std::string subject_id;
  std::string trial_id;
  bool degenerate = false;  // zero-variance input; data is all zeros

  std::size_t n_channels() const { return data.rows; }
  std::size_t n_samples() const { return data.cols; }
};

// One-sided complex spectrum per channel, bins[k] at frequency k * fs / n.
struct Spectrum {
  CMat bins;  // [channels x (n/2 + 1)]
  std::vector<double> bin_freqs;
  std::size_t n_samples = 0;
  double fs = 0.0;

  std::size_t n_channels() const { return bins.rows; }
  std::size_t n_bins() const { return bins.cols; }
};

inline std::size_t n_onesided_bins(std::size_t n_samples) { return n_samples / 2 + 1; }

// Hermitian weight of a one-sided bin: 2, except DC and (even n) Nyquist.
inline double onesided_weight(std::size_t k, std::size_t n) {
  if (k == 0) return 1.0;
  if (n % 2 == 0 && k == n / 2) return 1.0;
  return 2.0;
}

// Standardize by a single mean/std over all channels and samples jointly
// (population std). A zero-variance input yields an all-zero trial with the
// degenerate flag set so batch pipelines can skip it.
inline TrialTensor standardize_trial(const Mat& raw, double fs, int label,
                                     std::string subject_id = {}, std::string trial_id = {}) {
  if (raw.rows == 0 || raw.cols == 0)
    throw std::invalid_argument("standardize_trial: empty input");
  if (!(fs > 0.0)) throw std::invalid_argument("standardize_trial: fs must be positive");

  const std::size_t n = raw.size();
  double sum = 0.0;
  for (double x : raw.v) {
    if (!std::isfinite(x)) throw std::invalid_argument("standardize_trial: non-finite sample");
    sum += x;
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : raw.v) {
    const double d = x - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n);

  TrialTensor out;
  out.data = Mat(raw.rows, raw.cols);
  out.fs = fs;
  out.label = label;
  out.subject_id = std::move(subject_id);
  out.trial_id = std::move(trial_id);
  if (var <= 1e-30) {
    out.degenerate = true;  // data stays zero
    return out;
  }
  const double inv_std = 1.0 / std::sqrt(var);
  for (std::size_t i = 0; i < n; ++i) out.data.v[i] = (raw.v[i] - mean) * inv_std;
  return out;
}

inline std::vector<double> make_bin_freqs(std::size_t n_samples, double fs) {
  const std::size_t m = n_onesided_bins(n_samples);
  std::vector<double> f(m);
  for (std::size_t k = 0; k < m; ++k)
    f[k] = static_cast<double>(k) * fs / static_cast<double>(n_samples);
  return f;
}

// One-sided spectrum per channel (unnormalized forward transform).
inline Spectrum rfft(const Mat& data, double fs) {
  if (data.rows == 0 || data.cols == 0) throw std::invalid_argument("rfft: empty input");
  Spectrum s;
  s.n_samples = data.cols;
  s.fs = fs;
  s.bin_freqs = make_bin_freqs(data.cols, fs);
  s.bins = CMat(data.rows, n_onesided_bins(data.cols));
  for (std::size_t c = 0; c < data.rows; ++c) fft::rfft(data.row(c), data.cols, s.bins.row(c));
  return s;
}

inline Spectrum rfft(const TrialTensor& trial) { return rfft(trial.data, trial.fs); }

// Inverse of rfft (1/n scaling). The spectrum must have been produced for
// exactly n_samples.
inline Mat irfft(const Spectrum& spec, std::size_t n_samples) {
  if (spec.n_samples != n_samples || spec.n_bins() != n_onesided_bins(n_samples))
    throw std::invalid_argument("irfft: spectrum length does not match requested n_samples");
  Mat out(spec.n_channels(), n_samples);
  for (std::size_t c = 0; c < spec.n_channels(); ++c)
    fft::irfft(spec.bins.row(c), n_samples, out.row(c));
  return out;
}

// Analytic signal x + iH(x) from the one-sided spectrum of a real signal:
// strictly positive-frequency bins are doubled, DC (and Nyquist, when
// present) kept unscaled, then inverse complex transform.
inline CMat analytic_signal(const Spectrum& spec, std::size_t n_samples) {
  if (spec.n_samples != n_samples || spec.n_bins() != n_onesided_bins(n_samples))
    throw std::invalid_argument("analytic_signal: spectrum length mismatch");
  const std::size_t m = spec.n_bins();
  CMat out(spec.n_channels(), n_samples);
  std::vector<std::complex<double>> full(n_samples);
  for (std::size_t c = 0; c < spec.n_channels(); ++c) {
    std::fill(full.begin(), full.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t k = 0; k < m; ++k)
      full[k] = spec.bins(c, k) * onesided_weight(k, n_samples);
    fft::icfft(full.data(), n_samples, out.row(c));
  }
  return out;
}

// Adjoint of irfft as a real-linear map from one-sided bins (re, im parts) to
// samples: given dL/dx per sample, returns dL/dX per bin. Used by the
// gradient engine; see irfft for the forward map.
inline CMat irfft_adjoint(const Mat& grad_time) {
  const std::size_t n = grad_time.cols;
  const std::size_t m = n_onesided_bins(n);
  CMat out(grad_time.rows, m);
  std::vector<std::complex<double>> g(m);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < grad_time.rows; ++c) {
    fft::rfft(grad_time.row(c), n, g.data());
    for (std::size_t k = 0; k < m; ++k) out(c, k) = g[k] * (onesided_weight(k, n) * inv_n);
  }
  return out;
}

// Adjoint of analytic_signal: given dL/da per complex sample, returns dL/dX
// per one-sided bin.
inline CMat analytic_signal_adjoint(const CMat& grad_analytic) {
  const std::size_t n = grad_analytic.cols;
  const std::size_t m = n_onesided_bins(n);
  CMat out(grad_analytic.rows, m);
  std::vector<std::complex<double>> g(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < grad_analytic.rows; ++c) {
    fft::cfft(grad_analytic.row(c), n, g.data());
    for (std::size_t k = 0; k < m; ++k) out(c, k) = g[k] * (onesided_weight(k, n) * inv_n);
  }
  return out;
}

}  // namespace eegminer
