#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "eegminer/features.hpp"
#include "eegminer/filterbank.hpp"
#include "eegminer/model.hpp"
#include "eegminer/signal.hpp"

namespace eegminer {

// Reverse pass composing all module gradients end-to-end:
//   loss -> head -> features -> inverse transform / analytic signal
//        -> filter response -> (mu, h, beta_raw).
//
// The FFT stages are linear, so their adjoints are the transposed transforms
// in signal.hpp; the feature modules contribute the local Jacobians below.
// Accumulation order is fixed (trial, then map, then channel, then bin) so
// gradients are bit-stable for a given seed and batch order.

// Per-filter gradient accumulators aligned with FilterBank plus head
// gradients; zeroed before each batch.
struct GradientTape {
  std::vector<double> d_mu;
  std::vector<double> d_h;
  std::vector<double> d_beta_raw;
  std::vector<double> d_weights;
  double d_bias = 0.0;
};

inline GradientTape make_tape(const FilterBank& bank, std::size_t dim) {
  GradientTape t;
  t.d_mu.assign(bank.n_filters(), 0.0);
  t.d_h.assign(bank.n_filters(), 0.0);
  t.d_beta_raw.assign(bank.n_filters(), 0.0);
  t.d_weights.assign(dim, 0.0);
  return t;
}

// Throws on the first non-finite gradient, naming the parameter.
inline void check_tape_finite(const GradientTape& t) {
  auto check = [](const std::vector<double>& xs, const char* name) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (!std::isfinite(xs[i]))
        throw std::runtime_error("backward: non-finite gradient for " + std::string(name) + "[" +
                                 std::to_string(i) + "]");
  };
  check(t.d_mu, "filter.mu");
  check(t.d_h, "filter.h");
  check(t.d_beta_raw, "filter.beta_raw");
  check(t.d_weights, "weight");
  if (!std::isfinite(t.d_bias)) throw std::runtime_error("backward: non-finite gradient for bias");
}

// Filter responses for one batch, recomputed from parameters every step.
// The linear-phase factor depends only on the bin grid and is shared by all
// filters.
struct BankResponses {
  std::vector<double> bin_freqs;
  std::vector<std::complex<double>> phase;            // e^{-i 2 pi x tau}
  std::vector<std::vector<double>> magnitude;         // per filter
  std::vector<FilterResponseGrad> grad;               // per filter (training only)
};

inline BankResponses compute_bank_responses(const FilterBank& bank,
                                            const std::vector<double>& bin_freqs,
                                            bool with_grads) {
  BankResponses r;
  r.bin_freqs = bin_freqs;
  r.phase.resize(bin_freqs.size());
  const double two_pi_tau = 2.0 * 3.14159265358979323846 * bank.group_delay_s;
  for (std::size_t k = 0; k < bin_freqs.size(); ++k) {
    const double a = -two_pi_tau * bin_freqs[k];
    r.phase[k] = std::complex<double>(std::cos(a), std::sin(a));
  }
  r.magnitude.resize(bank.n_filters());
  if (with_grads) r.grad.resize(bank.n_filters());
  for (std::size_t f = 0; f < bank.n_filters(); ++f) {
    r.magnitude[f] = filter_magnitude(bank.params[f], bin_freqs);
    if (with_grads) r.grad[f] = filter_response_grad(bank.params[f], bin_freqs);
  }
  return r;
}

// A trial plus its precomputed one-sided spectrum. The spectrum is a fixed
// transform of the data and may be cached across steps; filter responses may
// not.
struct PreparedTrial {
  const TrialTensor* trial = nullptr;
  Spectrum spectrum;
  Mat abs_bins;  // |X| per channel/bin
};

inline PreparedTrial prepare_trial(const TrialTensor& trial) {
  PreparedTrial p;
  p.trial = &trial;
  p.spectrum = rfft(trial);
  p.abs_bins = Mat(p.spectrum.n_channels(), p.spectrum.n_bins());
  for (std::size_t c = 0; c < p.spectrum.n_channels(); ++c)
    for (std::size_t k = 0; k < p.spectrum.n_bins(); ++k)
      p.abs_bins(c, k) = std::abs(p.spectrum.bins(c, k));
  return p;
}

// Forward intermediates for one trial, kept for the backward pass.
struct TrialWork {
  FeatureVector features;
  std::vector<Spectrum> maps;        // filtered spectra (correlation, PLV)
  std::vector<Mat> time;             // correlation: inverse-transformed maps
  std::vector<CorrMapCache> corr;
  std::vector<CMat> analytic;        // PLV
  std::vector<PlvMapCache> plv;
};

inline void forward_trial(const PreparedTrial& pt, const FilterBank& bank,
                          const BankResponses& R, FeatureKind kind, bool keep_work,
                          TrialWork& work) {
  const std::size_t C = pt.spectrum.n_channels();
  const std::size_t M = pt.spectrum.n_bins();
  const std::size_t N = pt.spectrum.n_samples;
  const std::size_t K = bank.n_maps;
  if (C != bank.n_channels)
    throw std::invalid_argument("forward_trial: channel count does not match bank");

  work.features.kind = kind;
  work.features.flagged = false;

  if (kind == FeatureKind::Magnitude) {
    // |Y| = |F| |X|, so the mean magnitude needs no filtered spectrum.
    work.features.values.assign(C * K, 0.0);
    const double inv_m = 1.0 / static_cast<double>(M);
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t c = 0; c < C; ++c) {
        const auto& mag = R.magnitude[bank.filter_index(c, j)];
        const double* ax = pt.abs_bins.row(c);
        double s = 0.0;
        for (std::size_t k = 0; k < M; ++k) s += mag[k] * ax[k];
        work.features.values[j * C + c] = s * inv_m;
      }
    }
    return;
  }

  // Connectivity kinds materialize the filtered maps.
  std::vector<std::vector<std::complex<double>>> responses(bank.n_filters());
  for (std::size_t f = 0; f < bank.n_filters(); ++f) {
    responses[f].resize(M);
    for (std::size_t k = 0; k < M; ++k) responses[f][k] = R.magnitude[f][k] * R.phase[k];
  }
  work.maps = apply_responses(pt.spectrum, bank, responses);

  const std::size_t P = C * (C - 1) / 2;
  work.features.values.assign(P * K, 0.0);

  if (kind == FeatureKind::Correlation) {
    work.time.resize(K);
    if (keep_work) work.corr.resize(K);
    for (std::size_t j = 0; j < K; ++j) {
      work.time[j] = irfft(work.maps[j], N);
      corr_map_features(work.time[j], work.features.values.data() + j * P,
                        keep_work ? &work.corr[j] : nullptr, &work.features.flagged);
    }
    return;
  }

  // PLV
  work.analytic.resize(K);
  if (keep_work) work.plv.resize(K);
  for (std::size_t j = 0; j < K; ++j) {
    work.analytic[j] = analytic_signal(work.maps[j], N);
    plv_map_features(work.analytic[j], work.features.values.data() + j * P,
                     keep_work ? &work.plv[j] : nullptr, &work.features.flagged);
  }
}

inline FeatureVector forward_features(const PreparedTrial& pt, const FilterBank& bank,
                                      const BankResponses& R, FeatureKind kind) {
  TrialWork work;
  forward_trial(pt, bank, R, kind, /*keep_work=*/false, work);
  return work.features;
}

namespace detail {

// dL/d|F| summed into the per-parameter tape entries of one filter.
inline void accumulate_filter_grad(GradientTape& tape, const BankResponses& R, std::size_t f,
                                   const std::vector<double>& d_mag) {
  const auto& g = R.grad[f];
  double dmu = 0.0, dh = 0.0, dbeta = 0.0;
  for (std::size_t k = 0; k < d_mag.size(); ++k) {
    dmu += d_mag[k] * g.d_mu[k];
    dh += d_mag[k] * g.d_h[k];
    dbeta += d_mag[k] * g.d_beta_raw[k];
  }
  tape.d_mu[f] += dmu;
  tape.d_h[f] += dh;
  tape.d_beta_raw[f] += dbeta;
}

// dL/d|F|_k from a filtered-spectrum gradient: Y = X |F| phase, so
// dL/d|F|_k = Re(conj(gY_k) X_k phase_k).
inline void mag_grad_from_spectrum_grad(const CMat& g_bins, std::size_t channel,
                                        const Spectrum& X, const BankResponses& R,
                                        std::vector<double>& d_mag) {
  const std::size_t M = X.n_bins();
  for (std::size_t k = 0; k < M; ++k) {
    const std::complex<double> gy = g_bins(channel, k);
    const std::complex<double> xk = X.bins(channel, k) * R.phase[k];
    d_mag[k] += gy.real() * xk.real() + gy.imag() * xk.imag();
  }
}

}  // namespace detail

// Backward pass of one trial: dL/dfeatures -> filter-parameter gradients.
inline void backward_trial(const PreparedTrial& pt, const FilterBank& bank,
                           const BankResponses& R, FeatureKind kind, const TrialWork& work,
                           const double* d_feat, GradientTape& tape) {
  const std::size_t C = pt.spectrum.n_channels();
  const std::size_t M = pt.spectrum.n_bins();
  const std::size_t N = pt.spectrum.n_samples;
  const std::size_t K = bank.n_maps;

  if (kind == FeatureKind::Magnitude) {
    const double inv_m = 1.0 / static_cast<double>(M);
    std::vector<double> d_mag(M);
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t c = 0; c < C; ++c) {
        const double g = d_feat[j * C + c] * inv_m;
        if (g == 0.0) continue;
        const double* ax = pt.abs_bins.row(c);
        for (std::size_t k = 0; k < M; ++k) d_mag[k] = g * ax[k];
        detail::accumulate_filter_grad(tape, R, bank.filter_index(c, j), d_mag);
      }
    }
    return;
  }

  const std::size_t P = C * (C - 1) / 2;
  const auto pairs = channel_pairs(C);

  if (kind == FeatureKind::Correlation) {
    for (std::size_t j = 0; j < K; ++j) {
      const CorrMapCache& cc = work.corr[j];
      const std::size_t T = N;
      Mat g_time(C, T);
      for (std::size_t p = 0; p < P; ++p) {
        const double df = d_feat[j * P + p];
        if (df == 0.0) continue;
        const auto [a, b] = pairs[p];
        if (cc.degenerate[a] || cc.degenerate[b]) continue;  // feature pinned to 0
        const double r = cc.r[p];
        const double sgn = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);  // d|r|/dr
        const double dr = df * sgn;
        if (dr == 0.0) continue;
        const double* xa = cc.centered.row(a);
        const double* xb = cc.centered.row(b);
        const double inv_ab = 1.0 / (cc.sigma[a] * cc.sigma[b]);
        const double ra2 = r / (cc.sigma[a] * cc.sigma[a]);
        const double rb2 = r / (cc.sigma[b] * cc.sigma[b]);
        double* ga = g_time.row(a);
        double* gb = g_time.row(b);
        for (std::size_t t = 0; t < T; ++t) {
          ga[t] += dr * (xb[t] * inv_ab - ra2 * xa[t]);
          gb[t] += dr * (xa[t] * inv_ab - rb2 * xb[t]);
        }
      }
      const CMat g_bins = irfft_adjoint(g_time);
      std::vector<double> d_mag(M);
      for (std::size_t c = 0; c < C; ++c) {
        std::fill(d_mag.begin(), d_mag.end(), 0.0);
        detail::mag_grad_from_spectrum_grad(g_bins, c, pt.spectrum, R, d_mag);
        detail::accumulate_filter_grad(tape, R, bank.filter_index(c, j), d_mag);
      }
    }
    return;
  }

  // PLV
  for (std::size_t j = 0; j < K; ++j) {
    const PlvMapCache& pc = work.plv[j];
    const CMat& a_sig = work.analytic[j];
    const std::size_t T = N;
    Mat g_u(C, T), g_v(C, T);
    const double inv_t = 1.0 / static_cast<double>(T);
    for (std::size_t p = 0; p < P; ++p) {
      const double df = d_feat[j * P + p];
      if (df == 0.0) continue;
      const auto [a, b] = pairs[p];
      const std::complex<double> s = pc.s[p];
      const double mag_s = std::abs(s);
      if (mag_s == 0.0) continue;  // subgradient 0 at |S| = 0
      const double g_re = df * inv_t * s.real() / mag_s;
      const double g_im = df * inv_t * s.imag() / mag_s;
      const double* ua = pc.u.row(a);
      const double* va = pc.v.row(a);
      const double* ub = pc.u.row(b);
      const double* vb = pc.v.row(b);
      double* gua = g_u.row(a);
      double* gva = g_v.row(a);
      double* gub = g_u.row(b);
      double* gvb = g_v.row(b);
      for (std::size_t t = 0; t < T; ++t) {
        gua[t] += g_re * ub[t] - g_im * vb[t];
        gva[t] += g_re * vb[t] + g_im * ub[t];
        gub[t] += g_re * ua[t] + g_im * va[t];
        gvb[t] += g_re * va[t] - g_im * ua[t];
      }
    }
    // (u, v) -> analytic-signal gradient through the envelope normalization.
    CMat g_analytic(C, T);
    for (std::size_t c = 0; c < C; ++c) {
      const auto* az = a_sig.row(c);
      const double* gu = g_u.row(c);
      const double* gv = g_v.row(c);
      auto* gz = g_analytic.row(c);
      for (std::size_t t = 0; t < T; ++t) {
        const double re = az[t].real();
        const double im = az[t].imag();
        const double amp = pc.env(c, t);
        if (std::abs(az[t]) < kPlvEnvelopeFloor) {
          // Clamped branch: envelope treated as locally constant.
          gz[t] = std::complex<double>(gu[t] / amp, gv[t] / amp);
          continue;
        }
        const double inv_a3 = 1.0 / (amp * amp * amp);
        const double gre = (gu[t] * im * im - gv[t] * re * im) * inv_a3;
        const double gim = (-gu[t] * re * im + gv[t] * re * re) * inv_a3;
        gz[t] = std::complex<double>(gre, gim);
      }
    }
    const CMat g_bins = analytic_signal_adjoint(g_analytic);
    std::vector<double> d_mag(M);
    for (std::size_t c = 0; c < C; ++c) {
      std::fill(d_mag.begin(), d_mag.end(), 0.0);
      detail::mag_grad_from_spectrum_grad(g_bins, c, pt.spectrum, R, d_mag);
      detail::accumulate_filter_grad(tape, R, bank.filter_index(c, j), d_mag);
    }
  }
}

struct BackwardResult {
  GradientTape tape;
  double loss = 0.0;
  std::vector<double> probs;
  Mat features;       // raw (pre-normalization) features, [B x D]
  Mat feature_grads;  // dL/dfeatures, [B x D]
};

inline void validate_batch(const std::vector<const PreparedTrial*>& batch,
                           const ModelState& state) {
  if (batch.size() < 2) throw std::invalid_argument("backward: batch size must be >= 2");
  const std::size_t N = batch[0]->spectrum.n_samples;
  for (const auto* pt : batch) {
    if (pt->spectrum.n_samples != N)
      throw std::invalid_argument("backward: mixed trial lengths within one batch");
    if (pt->spectrum.n_channels() != state.bank.n_channels)
      throw std::invalid_argument("backward: trial channel count does not match model");
  }
}

// Forward + reverse pass over one batch. Mutates only the batch-norm running
// statistics (train-mode side effect); the optimizer applies the tape.
inline BackwardResult backward_batch(const std::vector<const PreparedTrial*>& batch,
                                     ModelState& state, double gamma,
                                     bool update_running = true) {
  validate_batch(batch, state);
  const std::size_t B = batch.size();
  const std::size_t D = state.head.weights.size();

  BankResponses R =
      compute_bank_responses(state.bank, batch[0]->spectrum.bin_freqs, /*with_grads=*/true);

  std::vector<TrialWork> works(B);
  Mat features(B, D);
  std::vector<double> targets(B);
  for (std::size_t i = 0; i < B; ++i) {
    forward_trial(*batch[i], state.bank, R, state.kind, /*keep_work=*/true, works[i]);
    if (works[i].features.values.size() != D)
      throw std::invalid_argument("backward: feature dimension mismatch");
    for (std::size_t d = 0; d < D; ++d) features(i, d) = works[i].features.values[d];
    targets[i] = static_cast<double>(batch[i]->trial->label);
  }

  HeadBackward head = head_forward_backward(features, state.bn, state.head, targets, gamma,
                                            update_running, /*with_backward=*/true);

  BackwardResult out;
  out.loss = head.loss;
  out.probs = std::move(head.probs);
  out.features = std::move(features);
  out.feature_grads = head.d_features;
  out.tape = make_tape(state.bank, D);
  out.tape.d_weights = std::move(head.d_weights);
  out.tape.d_bias = head.d_bias;

  for (std::size_t i = 0; i < B; ++i)
    backward_trial(*batch[i], state.bank, R, state.kind, works[i], head.d_features.row(i),
                   out.tape);

  if (!std::isfinite(out.loss)) throw std::runtime_error("backward: non-finite loss");
  check_tape_finite(out.tape);
  return out;
}

// Convenience overload: prepares spectra and runs one batch.
inline BackwardResult backward(const std::vector<TrialTensor>& trials, ModelState& state,
                               double gamma) {
  std::vector<PreparedTrial> prepared(trials.size());
  std::vector<const PreparedTrial*> batch(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    prepared[i] = prepare_trial(trials[i]);
    batch[i] = &prepared[i];
  }
  return backward_batch(batch, state, gamma);
}

// Loss of one batch without gradients or state mutation; the finite-difference
// oracle in the tests differentiates this.
inline double forward_loss(const std::vector<const PreparedTrial*>& batch,
                           const ModelState& state, double gamma) {
  validate_batch(batch, state);
  const std::size_t B = batch.size();
  const std::size_t D = state.head.weights.size();
  BankResponses R =
      compute_bank_responses(state.bank, batch[0]->spectrum.bin_freqs, /*with_grads=*/false);
  Mat features(B, D);
  std::vector<double> targets(B);
  for (std::size_t i = 0; i < B; ++i) {
    const FeatureVector f = forward_features(*batch[i], state.bank, R, state.kind);
    for (std::size_t d = 0; d < D; ++d) features(i, d) = f.values[d];
    targets[i] = static_cast<double>(batch[i]->trial->label);
  }
  BatchNormState bn = state.bn;  // local copy; no mutation escapes
  HeadBackward head = head_forward_backward(features, bn, state.head, targets, gamma,
                                            /*update_running=*/false, /*with_backward=*/false);
  return head.loss;
}

}  // namespace eegminer
