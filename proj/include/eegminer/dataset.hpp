#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegminer/rng.hpp"
#include "eegminer/signal.hpp"

namespace eegminer {

using nlohmann::json;

// On-disk dataset format: a JSON manifest plus one little-endian float32
// binary file per trial, row-major [channels x samples]. Trivially parseable
// from any language; see README for the schema.

struct TrialMeta {
  std::string file;
  std::string subject_id;
  int label = 0;
  std::size_t n_samples = 0;
};

struct DatasetManifest {
  int format_version = 1;
  double fs = 0.0;
  std::vector<std::string> channel_names;
  std::vector<TrialMeta> trials;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<TrialTensor> trials;  // standardized
};

inline void write_trial_f32(const std::filesystem::path& path, const Mat& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trial_f32: cannot open " + path.string());
  std::vector<float> buf(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) buf[i] = static_cast<float>(data.v[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write_trial_f32: write failed for " + path.string());
}

inline Mat read_trial_f32(const std::filesystem::path& path, std::size_t n_channels,
                          std::size_t n_samples) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::invalid_argument("read_trial_f32: cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  const std::size_t expected = n_channels * n_samples * sizeof(float);
  if (bytes != expected)
    throw std::invalid_argument("read_trial_f32: " + path.string() + " has " +
                                std::to_string(bytes) + " bytes, expected " +
                                std::to_string(expected));
  in.seekg(0);
  std::vector<float> buf(n_channels * n_samples);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected));
  if (!in) throw std::invalid_argument("read_trial_f32: short read on " + path.string());
  Mat m(n_channels, n_samples);
  for (std::size_t i = 0; i < buf.size(); ++i) m.v[i] = static_cast<double>(buf[i]);
  return m;
}

inline json manifest_to_json(const DatasetManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["fs"] = m.fs;
  j["channel_names"] = m.channel_names;
  j["trials"] = json::array();
  for (const auto& t : m.trials) {
    j["trials"].push_back({{"file", t.file},
                           {"subject_id", t.subject_id},
                           {"label", t.label},
                           {"n_samples", t.n_samples}});
  }
  return j;
}

inline DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != 1)
    throw std::invalid_argument("manifest: unsupported format_version " +
                                std::to_string(m.format_version));
  m.fs = j.at("fs").get<double>();
  m.channel_names = j.at("channel_names").get<std::vector<std::string>>();
  for (const auto& t : j.at("trials")) {
    TrialMeta meta;
    meta.file = t.at("file").get<std::string>();
    meta.subject_id = t.at("subject_id").get<std::string>();
    meta.label = t.at("label").get<int>();
    meta.n_samples = t.at("n_samples").get<std::size_t>();
    if (meta.label != 0 && meta.label != 1)
      throw std::invalid_argument("manifest: label of " + meta.file + " must be 0 or 1");
    m.trials.push_back(std::move(meta));
  }
  return m;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_manifest: cannot open " + path.string());
  out << manifest_to_json(m).dump(2) << "\n";
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_manifest: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("load_manifest: " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

// Loads and standardizes every trial; file paths are resolved relative to the
// manifest location.
inline Dataset load_dataset(const std::filesystem::path& manifest_path) {
  Dataset ds;
  ds.manifest = load_manifest(manifest_path);
  if (ds.manifest.trials.empty()) throw std::invalid_argument("load_dataset: empty trial list");
  if (!(ds.manifest.fs > 0.0)) throw std::invalid_argument("load_dataset: fs must be positive");
  const std::size_t C = ds.manifest.channel_names.size();
  if (C == 0) throw std::invalid_argument("load_dataset: no channels in manifest");
  const auto base = manifest_path.parent_path();
  for (std::size_t i = 0; i < ds.manifest.trials.size(); ++i) {
    const TrialMeta& meta = ds.manifest.trials[i];
    const Mat raw = read_trial_f32(base / meta.file, C, meta.n_samples);
    TrialTensor t = standardize_trial(raw, ds.manifest.fs, meta.label, meta.subject_id,
                                      meta.file);
    ds.trials.push_back(std::move(t));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic data with planted class effects, for end-to-end feature-recovery
// experiments. The generator is deterministic per (spec, seed): every random
// stream is keyed by subject and trial, independent of generation order.
// ---------------------------------------------------------------------------

enum class EffectKind { MagnitudeBoost, CorrelationLink, PhaseLock };

struct PlantedEffect {
  EffectKind kind = EffectKind::MagnitudeBoost;
  std::size_t channel_a = 0;
  std::size_t channel_b = 0;  // unused for MagnitudeBoost
  double band_lo_hz = 8.0;
  double band_hi_hz = 13.0;
  double gain = 3.0;      // MagnitudeBoost: target-class band magnitude ratio
  double strength = 1.0;  // CorrelationLink: shared-source fraction in (0, 1]
  double jitter = 0.0;    // PhaseLock: phase noise std (rad);
                          // MagnitudeBoost: per-trial log-jitter of the contrast
  int target_class = 1;
};

struct SynthSpec {
  std::size_t n_subjects = 40;
  std::size_t trials_per_subject = 4;
  std::size_t n_channels = 8;
  double fs = 128.0;
  double duration_s = 20.0;
  double noise_level = 1.0;
  double effect_amplitude = 2.0;    // in-band RMS of planted signals
  double subject_gain_sigma = 0.1;  // log-normal per-subject channel gains
  std::uint64_t seed = 0;
  std::vector<PlantedEffect> effects;

  void validate() const {
    if (n_subjects < 2) throw std::invalid_argument("synth spec: need at least 2 subjects");
    if (trials_per_subject < 1) throw std::invalid_argument("synth spec: trials_per_subject < 1");
    if (n_channels < 1) throw std::invalid_argument("synth spec: n_channels < 1");
    if (!(fs > 0.0)) throw std::invalid_argument("synth spec: fs must be positive");
    if (!(duration_s > 0.0)) throw std::invalid_argument("synth spec: duration_s must be positive");
    if (noise_level < 0.0) throw std::invalid_argument("synth spec: noise_level < 0");
    for (const auto& e : effects) {
      if (!(e.band_lo_hz > 0.0) || !(e.band_hi_hz <= fs / 2.0) || !(e.band_lo_hz < e.band_hi_hz))
        throw std::invalid_argument("synth spec: effect band must lie within (0, fs/2)");
      if (!(e.gain > 0.0)) throw std::invalid_argument("synth spec: effect gain must be > 0");
      if (!(e.strength > 0.0) || e.strength > 1.0)
        throw std::invalid_argument("synth spec: effect strength must be in (0, 1]");
      if (e.jitter < 0.0) throw std::invalid_argument("synth spec: effect jitter < 0");
      if (e.channel_a >= n_channels || (e.kind != EffectKind::MagnitudeBoost &&
                                        (e.channel_b >= n_channels || e.channel_a == e.channel_b)))
        throw std::invalid_argument("synth spec: effect channels out of range");
      if (e.target_class != 0 && e.target_class != 1)
        throw std::invalid_argument("synth spec: target_class must be 0 or 1");
    }
  }
};

struct RawTrial {
  Mat data;  // unstandardized
  std::string subject_id;
  std::string trial_id;
  int label = 0;
};

struct SynthResult {
  double fs = 0.0;
  std::vector<std::string> channel_names;
  std::vector<RawTrial> trials;
};

namespace detail {

// Band-limited Gaussian noise with unit RMS, synthesized in the frequency
// domain (complex Gaussian bins inside the band).
inline std::vector<double> band_noise(std::size_t n, double fs, double lo, double hi, Rng& rng) {
  const std::size_t m = n_onesided_bins(n);
  std::vector<std::complex<double>> bins(m, {0.0, 0.0});
  bool any = false;
  for (std::size_t k = 1; k < m; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < lo || f > hi) continue;
    bins[k] = std::complex<double>(rng.gauss(), rng.gauss());
    any = true;
  }
  std::vector<double> x(n, 0.0);
  if (!any) return x;
  fft::irfft(bins.data(), n, x.data());
  double rms = 0.0;
  for (double v : x) rms += v * v;
  rms = std::sqrt(rms / static_cast<double>(n));
  if (rms > 0.0)
    for (double& v : x) v /= rms;
  return x;
}

// Complex narrowband carrier with unit-RMS real part.
inline std::vector<std::complex<double>> band_carrier(std::size_t n, double fs, double lo,
                                                      double hi, Rng& rng) {
  const std::size_t m = n_onesided_bins(n);
  std::vector<std::complex<double>> bins(n, {0.0, 0.0});
  bool any = false;
  for (std::size_t k = 1; k < m; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < lo || f > hi) continue;
    bins[k] = std::complex<double>(rng.gauss(), rng.gauss());
    any = true;
  }
  std::vector<std::complex<double>> z(n, {0.0, 0.0});
  if (!any) return z;
  fft::icfft(bins.data(), n, z.data());
  double rms = 0.0;
  for (const auto& v : z) rms += v.real() * v.real();
  rms = std::sqrt(rms / static_cast<double>(n));
  if (rms > 0.0)
    for (auto& v : z) v /= rms;
  return z;
}

// Smoothed phase-noise track with the requested standard deviation.
inline std::vector<double> phase_jitter(std::size_t n, double sigma, Rng& rng) {
  std::vector<double> raw(n);
  for (double& v : raw) v = rng.gauss();
  const std::size_t w = std::max<std::size_t>(1, n / 64);
  std::vector<double> smooth(n, 0.0);
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    acc += raw[t];
    if (t >= w) acc -= raw[t - w];
    smooth[t] = acc / static_cast<double>(std::min(t + 1, w));
  }
  double mean = 0.0;
  for (double v : smooth) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : smooth) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double scale = var > 0.0 ? sigma / std::sqrt(var) : 0.0;
  for (double& v : smooth) v = (v - mean) * scale;
  return smooth;
}

}  // namespace detail

inline SynthResult generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const std::size_t N = static_cast<std::size_t>(std::llround(spec.duration_s * spec.fs));
  const std::size_t C = spec.n_channels;
  const double bg_lo = 1.0;
  const double bg_hi = std::min(45.0, 0.9 * spec.fs / 2.0);

  SynthResult out;
  out.fs = spec.fs;
  for (std::size_t c = 0; c < C; ++c) out.channel_names.push_back("ch" + std::to_string(c));

  // Per-subject multiplicative channel gains keep subjects distinguishable
  // without making the classes separable. Gains are normalized to unit
  // geometric mean per subject: a subject-common scalar would be stripped by
  // trial standardization anyway, but its fluctuation would leak a correlated
  // 1/std factor into every standardized feature.
  std::vector<std::vector<double>> subject_gain(spec.n_subjects, std::vector<double>(C, 1.0));
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    Rng rng(mix_seed(spec.seed, 0x5AB0 + s));
    double log_sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double lg = spec.subject_gain_sigma * rng.gauss();
      subject_gain[s][c] = lg;
      log_sum += lg;
    }
    for (std::size_t c = 0; c < C; ++c)
      subject_gain[s][c] = std::exp(subject_gain[s][c] - log_sum / static_cast<double>(C));
  }

  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    for (std::size_t i = 0; i < spec.trials_per_subject; ++i) {
      const int label = static_cast<int>(i % 2);
      Rng rng(mix_seed(spec.seed, s, i));
      Mat x(C, N, 0.0);
      for (std::size_t c = 0; c < C; ++c) {
        const auto noise = detail::band_noise(N, spec.fs, bg_lo, bg_hi, rng);
        for (std::size_t t = 0; t < N; ++t) x(c, t) = spec.noise_level * noise[t];
      }

      for (const auto& e : spec.effects) {
        const bool on_target = label == e.target_class;
        switch (e.kind) {
          case EffectKind::MagnitudeBoost: {
            // Band-swap construction. The target class carries the strong
            // amplitude in the planted band and the weak one in a counter
            // band (mirrored about the 23 Hz filter initialization, pushed
            // 5 Hz further out); the other class swaps the two. Classes then
            // differ in band LOCATION but not in channel power, so per-trial
            // standardization cannot smear a class signal into the other
            // channels. The planted-band magnitude ratio between classes is
            // exactly the gain.
            const double width = e.band_hi_hz - e.band_lo_hz;
            const double center = 0.5 * (e.band_lo_hz + e.band_hi_hz);
            double c_lo, c_hi;
            if (center <= 23.0) {
              c_lo = 46.0 - e.band_hi_hz + 5.0;
              c_hi = c_lo + width;
            } else {
              c_hi = 46.0 - e.band_lo_hz - 5.0;
              c_lo = c_hi - width;
            }
            if (c_lo < e.band_hi_hz + 2.0 && c_hi > e.band_lo_hz - 2.0) {
              c_lo = e.band_hi_hz + 2.0;  // keep the bands disjoint
              c_hi = c_lo + width;
            }
            c_hi = std::min(c_hi, spec.fs / 2.0 - 0.5);
            c_lo = std::max(0.5, std::min(c_lo, c_hi - 0.1));
            // The band/counter power split is log-jittered per trial around
            // the gain (jitter field), holding the total power fixed: hard
            // trials near ratio 1 keep training residuals alive without
            // opening a trial-power side channel.
            const double total = spec.effect_amplitude * spec.effect_amplitude *
                                 (e.gain + 1.0 / e.gain);
            const double ratio = e.gain * e.gain * std::exp(e.jitter * rng.gauss());
            const double hi_amp = std::sqrt(total * ratio / (1.0 + ratio));
            const double lo_amp = std::sqrt(total / (1.0 + ratio));
            const auto band_sig = detail::band_noise(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
            const auto counter_sig = detail::band_noise(N, spec.fs, c_lo, c_hi, rng);
            const double a_band = on_target ? hi_amp : lo_amp;
            const double a_counter = on_target ? lo_amp : hi_amp;
            for (std::size_t t = 0; t < N; ++t)
              x(e.channel_a, t) += a_band * band_sig[t] + a_counter * counter_sig[t];
            break;
          }
          case EffectKind::CorrelationLink: {
            const double amp = spec.effect_amplitude;
            if (on_target) {
              const auto shared = detail::band_noise(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
              const auto n1 = detail::band_noise(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
              const auto n2 = detail::band_noise(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
              const double ws = std::sqrt(e.strength);
              const double wi = std::sqrt(1.0 - e.strength);
              for (std::size_t t = 0; t < N; ++t) {
                x(e.channel_a, t) += amp * (ws * shared[t] + wi * n1[t]);
                x(e.channel_b, t) += amp * (ws * shared[t] + wi * n2[t]);
              }
            } else {
              // Same in-band power, but independent sources.
              const auto n1 = detail::band_noise(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
              const auto n2 = detail::band_noise(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
              for (std::size_t t = 0; t < N; ++t) {
                x(e.channel_a, t) += amp * n1[t];
                x(e.channel_b, t) += amp * n2[t];
              }
            }
            break;
          }
          case EffectKind::PhaseLock: {
            const double amp = spec.effect_amplitude;
            if (on_target) {
              const auto z = detail::band_carrier(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
              const auto ja = detail::phase_jitter(N, e.jitter, rng);
              const auto jb = detail::phase_jitter(N, e.jitter, rng);
              for (std::size_t t = 0; t < N; ++t) {
                x(e.channel_a, t) +=
                    amp * (z[t] * std::exp(std::complex<double>(0.0, ja[t]))).real();
                x(e.channel_b, t) +=
                    amp * (z[t] * std::exp(std::complex<double>(0.0, jb[t]))).real();
              }
            } else {
              const auto za = detail::band_carrier(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
              const auto zb = detail::band_carrier(N, spec.fs, e.band_lo_hz, e.band_hi_hz, rng);
              for (std::size_t t = 0; t < N; ++t) {
                x(e.channel_a, t) += amp * za[t].real();
                x(e.channel_b, t) += amp * zb[t].real();
              }
            }
            break;
          }
        }
      }

      for (std::size_t c = 0; c < C; ++c) {
        const double g = subject_gain[s][c];
        for (std::size_t t = 0; t < N; ++t) x(c, t) *= g;
      }

      RawTrial trial;
      trial.data = std::move(x);
      trial.subject_id = "subj" + std::to_string(s);
      trial.trial_id = "subj" + std::to_string(s) + "_trial" + std::to_string(i);
      trial.label = label;
      out.trials.push_back(std::move(trial));
    }
  }
  return out;
}

// Standardized in-memory view of a generated dataset.
inline std::vector<TrialTensor> to_trials(const SynthResult& synth) {
  std::vector<TrialTensor> trials;
  trials.reserve(synth.trials.size());
  for (const auto& r : synth.trials)
    trials.push_back(standardize_trial(r.data, synth.fs, r.label, r.subject_id, r.trial_id));
  return trials;
}

inline json synth_spec_to_json(const SynthSpec& s) {
  json j;
  j["n_subjects"] = s.n_subjects;
  j["trials_per_subject"] = s.trials_per_subject;
  j["n_channels"] = s.n_channels;
  j["fs"] = s.fs;
  j["duration_s"] = s.duration_s;
  j["noise_level"] = s.noise_level;
  j["effect_amplitude"] = s.effect_amplitude;
  j["subject_gain_sigma"] = s.subject_gain_sigma;
  j["seed"] = s.seed;
  j["effects"] = json::array();
  for (const auto& e : s.effects) {
    const char* kind = e.kind == EffectKind::MagnitudeBoost ? "magnitude_boost"
                       : e.kind == EffectKind::CorrelationLink ? "correlation_link"
                                                               : "phase_lock";
    j["effects"].push_back({{"kind", kind},
                            {"channel_a", e.channel_a},
                            {"channel_b", e.channel_b},
                            {"band_lo_hz", e.band_lo_hz},
                            {"band_hi_hz", e.band_hi_hz},
                            {"gain", e.gain},
                            {"strength", e.strength},
                            {"jitter", e.jitter},
                            {"target_class", e.target_class}});
  }
  return j;
}

inline SynthSpec synth_spec_from_json(const json& j) {
  static const std::vector<std::string> known = {
      "n_subjects", "trials_per_subject", "n_channels",         "fs",   "duration_s",
      "noise_level", "effect_amplitude",  "subject_gain_sigma", "seed", "effects"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("synth spec: unknown key '" + key + "'");
  }
  SynthSpec s;
  if (j.contains("n_subjects")) s.n_subjects = j.at("n_subjects").get<std::size_t>();
  if (j.contains("trials_per_subject"))
    s.trials_per_subject = j.at("trials_per_subject").get<std::size_t>();
  if (j.contains("n_channels")) s.n_channels = j.at("n_channels").get<std::size_t>();
  if (j.contains("fs")) s.fs = j.at("fs").get<double>();
  if (j.contains("duration_s")) s.duration_s = j.at("duration_s").get<double>();
  if (j.contains("noise_level")) s.noise_level = j.at("noise_level").get<double>();
  if (j.contains("effect_amplitude")) s.effect_amplitude = j.at("effect_amplitude").get<double>();
  if (j.contains("subject_gain_sigma"))
    s.subject_gain_sigma = j.at("subject_gain_sigma").get<double>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("effects")) {
    for (const auto& je : j.at("effects")) {
      static const std::vector<std::string> known_effect = {
          "kind", "channel_a", "channel_b", "band_lo_hz", "band_hi_hz",
          "gain", "strength",  "jitter",    "target_class"};
      for (const auto& [key, value] : je.items()) {
        (void)value;
        if (std::find(known_effect.begin(), known_effect.end(), key) == known_effect.end())
          throw std::invalid_argument("synth spec effect: unknown key '" + key + "'");
      }
      PlantedEffect e;
      const std::string kind = je.at("kind").get<std::string>();
      if (kind == "magnitude_boost") e.kind = EffectKind::MagnitudeBoost;
      else if (kind == "correlation_link") e.kind = EffectKind::CorrelationLink;
      else if (kind == "phase_lock") e.kind = EffectKind::PhaseLock;
      else throw std::invalid_argument("synth spec: unknown effect kind '" + kind + "'");
      if (je.contains("channel_a")) e.channel_a = je.at("channel_a").get<std::size_t>();
      if (je.contains("channel_b")) e.channel_b = je.at("channel_b").get<std::size_t>();
      if (je.contains("band_lo_hz")) e.band_lo_hz = je.at("band_lo_hz").get<double>();
      if (je.contains("band_hi_hz")) e.band_hi_hz = je.at("band_hi_hz").get<double>();
      if (je.contains("gain")) e.gain = je.at("gain").get<double>();
      if (je.contains("strength")) e.strength = je.at("strength").get<double>();
      if (je.contains("jitter")) e.jitter = je.at("jitter").get<double>();
      if (je.contains("target_class")) e.target_class = je.at("target_class").get<int>();
      s.effects.push_back(e);
    }
  }
  s.validate();
  return s;
}

// Writes manifest + trial binaries + the ground-truth record.
inline void save_synthetic(const SynthSpec& spec, const SynthResult& synth,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "trials");
  DatasetManifest manifest;
  manifest.fs = synth.fs;
  manifest.channel_names = synth.channel_names;
  for (std::size_t i = 0; i < synth.trials.size(); ++i) {
    const RawTrial& t = synth.trials[i];
    char name[64];
    std::snprintf(name, sizeof(name), "trials/trial_%05zu.f32", i);
    write_trial_f32(dir / name, t.data);
    TrialMeta meta;
    meta.file = name;
    meta.subject_id = t.subject_id;
    meta.label = t.label;
    meta.n_samples = t.data.cols;
    manifest.trials.push_back(std::move(meta));
  }
  save_manifest(manifest, dir / "manifest.json");
  std::ofstream gt(dir / "ground_truth.json");
  if (!gt) throw std::runtime_error("save_synthetic: cannot write ground truth");
  gt << synth_spec_to_json(spec).dump(2) << "\n";
}

}  // namespace eegminer
