#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "eegminer/signal.hpp"
#include "eegminer/types.hpp"

namespace eegminer {

// Trainable band-pass filters with a generalized Gaussian magnitude response
//
//   |F(x)| = exp(-(|x - mu| / alpha)^beta),   alpha = h / (2 ln(2)^{1/beta})
//
// where mu is the center frequency, h the full-width half-maximum bandwidth
// and beta the shape. The FWHM reparameterization pins |F(mu +- h/2)| = 0.5
// for every shape; beta = 2 is a Gaussian (Morlet in time), large beta
// approaches an ideal rectangular band-pass. The gain at x = mu is exactly 1
// (the usual generalized-Gaussian normalization factor is dropped).
//
// The stored shape parameter beta_raw lives in [2, 3] and the filter uses the
// rescaled beta_eff = 8 * beta_raw - 14 in [2, 10]; the affine rescaling
// speeds up shape training relative to the other two parameters.
//
// The phase response is linear, exp(-i 2 pi x tau) with a fixed group delay
// tau = 20 ms. The magnitude and all parameter gradients are independent of
// the phase term.

struct FilterParams {
  double mu = 0.0;        // center frequency, Hz (trainable)
  double h = 0.0;         // FWHM bandwidth, Hz (trainable)
  double beta_raw = 2.0;  // stored shape, clamped to [2, 3] (trainable)
};

inline double beta_eff_of(double beta_raw) { return 8.0 * beta_raw - 14.0; }
inline double beta_eff_of(const FilterParams& p) { return beta_eff_of(p.beta_raw); }

// Scale from bandwidth: alpha = h / (2 ln(2)^{1/beta}).
inline double alpha_from_fwhm(double h, double beta) {
  if (!(h > 0.0)) throw std::invalid_argument("alpha_from_fwhm: bandwidth must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("alpha_from_fwhm: shape must be positive");
  return h / (2.0 * std::pow(std::log(2.0), 1.0 / beta));
}

enum class BankLayout {
  PerElectrode,           // one independent filter per (channel, map)
  SharedAcrossElectrodes  // one filter per map, shared by all channels (PLV)
};

// Hard box bounds applied as a projection after every optimizer step.
struct ClampBounds {
  double mu_lo = 1.0;
  double mu_hi = 0.0;
  double h_lo = 1.0;
  double h_hi = 0.0;
  double beta_raw_lo = 2.0;
  double beta_raw_hi = 3.0;

  // mu in [1, fs/2 - 1], h in [1, fs/2]; keeps filters meaningful on the grid.
  static ClampBounds for_sample_rate(double fs) {
    ClampBounds b;
    b.mu_lo = 1.0;
    b.mu_hi = fs / 2.0 - 1.0;
    b.h_lo = 1.0;
    b.h_hi = fs / 2.0;
    return b;
  }
};

struct FilterBank {
  BankLayout layout = BankLayout::PerElectrode;
  std::size_t n_channels = 0;
  std::size_t n_maps = 0;
  std::vector<FilterParams> params;  // PerElectrode: [map * C + channel]; Shared: [map]
  double group_delay_s = 0.02;       // fixed, not trainable

  std::size_t n_filters() const { return params.size(); }
  std::size_t n_trainable() const { return 3 * params.size(); }

  // Filter slot used by (channel, map).
  std::size_t filter_index(std::size_t channel, std::size_t map) const {
    return layout == BankLayout::PerElectrode ? map * n_channels + channel : map;
  }
};

// All filters start identical: mu = 23 Hz, h = 44 Hz, beta_raw = 2
// (beta_eff = 2, Gaussian), wide enough to pass gradients at all relevant
// frequencies.
inline FilterBank init_bank(std::size_t n_channels, std::size_t n_maps, BankLayout layout) {
  if (n_channels < 1 || n_maps < 1)
    throw std::invalid_argument("init_bank: need at least one channel and one map");
  FilterBank bank;
  bank.layout = layout;
  bank.n_channels = n_channels;
  bank.n_maps = n_maps;
  const std::size_t count =
      layout == BankLayout::PerElectrode ? n_channels * n_maps : n_maps;
  bank.params.assign(count, FilterParams{23.0, 44.0, 2.0});
  return bank;
}

// Complex response over the given bins: magnitude as above, linear phase
// exp(-i 2 pi x tau).
inline std::vector<std::complex<double>> filter_response(const FilterParams& p,
                                                         const std::vector<double>& bin_freqs,
                                                         double group_delay_s = 0.02) {
  const double beta = beta_eff_of(p);
  const double alpha = alpha_from_fwhm(p.h, beta);
  const double two_pi_tau = 2.0 * 3.14159265358979323846 * group_delay_s;
  std::vector<std::complex<double>> out(bin_freqs.size());
  for (std::size_t k = 0; k < bin_freqs.size(); ++k) {
    const double x = bin_freqs[k];
    const double d = std::fabs(x - p.mu);
    const double mag = std::exp(-std::pow(d / alpha, beta));
    const double phase = -two_pi_tau * x;
    out[k] = std::complex<double>(mag * std::cos(phase), mag * std::sin(phase));
  }
  return out;
}

inline std::vector<double> filter_magnitude(const FilterParams& p,
                                            const std::vector<double>& bin_freqs) {
  const double beta = beta_eff_of(p);
  const double alpha = alpha_from_fwhm(p.h, beta);
  std::vector<double> out(bin_freqs.size());
  for (std::size_t k = 0; k < bin_freqs.size(); ++k) {
    const double d = std::fabs(bin_freqs[k] - p.mu);
    out[k] = std::exp(-std::pow(d / alpha, beta));
  }
  return out;
}

// Partial derivatives of the magnitude response with respect to the three
// stored parameters, per bin. With q = (d/alpha)^beta, d = |x - mu|:
//
//   d|F|/dmu  =  |F| beta q / d * sign(x - mu)          (0 at x = mu)
//   d|F|/dh   =  |F| beta q / h
//   d|F|/dbeta_eff = -|F| q (ln(d/alpha) - ln(ln 2)/beta)
//   d|F|/dbeta_raw = 8 * d|F|/dbeta_eff
//
// At x = mu all three vanish (symmetric stationary point; the |x - mu|
// subgradient is taken as 0 there).
struct FilterResponseGrad {
  std::vector<double> d_mu;
  std::vector<double> d_h;
  std::vector<double> d_beta_raw;
};

inline FilterResponseGrad filter_response_grad(const FilterParams& p,
                                               const std::vector<double>& bin_freqs) {
  const double beta = beta_eff_of(p);
  const double alpha = alpha_from_fwhm(p.h, beta);
  const double ln_ln2 = std::log(std::log(2.0));
  const std::size_t m = bin_freqs.size();
  FilterResponseGrad g;
  g.d_mu.assign(m, 0.0);
  g.d_h.assign(m, 0.0);
  g.d_beta_raw.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double x = bin_freqs[k];
    const double diff = x - p.mu;
    const double d = std::fabs(diff);
    if (d == 0.0) continue;
    const double q = std::pow(d / alpha, beta);
    const double mag = std::exp(-q);
    if (mag == 0.0 || q == 0.0) continue;
    const double common = mag * beta * q;
    g.d_mu[k] = common / d * (diff > 0.0 ? 1.0 : -1.0);
    g.d_h[k] = common / p.h;
    g.d_beta_raw[k] = 8.0 * (-mag * q * (std::log(d / alpha) - ln_ln2 / beta));
  }
  return g;
}

// Projection onto the clamp box; velocities are left untouched by design of
// the optimizer step.
inline void clamp_bank(FilterBank& bank, const ClampBounds& b) {
  for (auto& p : bank.params) {
    p.mu = std::clamp(p.mu, b.mu_lo, b.mu_hi);
    p.h = std::clamp(p.h, b.h_lo, b.h_hi);
    p.beta_raw = std::clamp(p.beta_raw, b.beta_raw_lo, b.beta_raw_hi);
  }
}

// Element-wise multiplication of each channel's bins by per-(channel, map)
// responses; one output spectrum per map.
inline std::vector<Spectrum> apply_responses(
    const Spectrum& spectra, const FilterBank& bank,
    const std::vector<std::vector<std::complex<double>>>& responses) {
  if (spectra.n_channels() != bank.n_channels)
    throw std::invalid_argument("apply_responses: channel count mismatch");
  if (responses.size() != bank.n_filters())
    throw std::invalid_argument("apply_responses: response count mismatch");
  std::vector<Spectrum> maps(bank.n_maps);
  for (std::size_t j = 0; j < bank.n_maps; ++j) {
    Spectrum& out = maps[j];
    out.bin_freqs = spectra.bin_freqs;
    out.n_samples = spectra.n_samples;
    out.fs = spectra.fs;
    out.bins = CMat(spectra.n_channels(), spectra.n_bins());
    for (std::size_t c = 0; c < spectra.n_channels(); ++c) {
      const auto& r = responses[bank.filter_index(c, j)];
      if (r.size() != spectra.n_bins())
        throw std::invalid_argument("apply_responses: bin count mismatch");
      for (std::size_t k = 0; k < spectra.n_bins(); ++k) out.bins(c, k) = spectra.bins(c, k) * r[k];
    }
  }
  return maps;
}

// K filtered multichannel spectra (feature maps): map j, channel c uses
// filter (c, j) for PerElectrode banks or filter j for shared banks.
inline std::vector<Spectrum> apply_filterbank(const Spectrum& spectra, const FilterBank& bank) {
  std::vector<std::vector<std::complex<double>>> responses(bank.n_filters());
  for (std::size_t f = 0; f < bank.n_filters(); ++f)
    responses[f] = filter_response(bank.params[f], spectra.bin_freqs, bank.group_delay_s);
  return apply_responses(spectra, bank, responses);
}

}  // namespace eegminer
