#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eegminer/gradient.hpp"
#include "eegminer/model.hpp"
#include "eegminer/rng.hpp"
#include "eegminer/stats.hpp"

namespace eegminer {

// Mini-batch SGD with Nesterov momentum, split momenta (0.99 on the filter
// parameters, 0.9 on the classifier), cosine learning-rate decay to zero and
// a clamping projection on the filter parameters after every step.

struct TrainConfig {
  FeatureKind feature_kind = FeatureKind::Magnitude;
  std::size_t n_maps = 2;  // feature maps K
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  double lr0 = 2e-3;
  double momentum_filters = 0.99;
  double momentum_head = 0.9;
  double gamma = 0.0;  // L1 scale on classifier weights
  std::uint64_t seed = 0;
  std::optional<double> window_s;      // disabled when absent
  std::size_t windows_per_epoch = 9;   // training windows per trial occurrence
  bool oversample_train = true;
  std::optional<ClampBounds> clamp_bounds;  // default: ClampBounds::for_sample_rate(fs)

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
    if (batch_size < 2) throw std::invalid_argument("train config: batch_size must be >= 2");
    if (lr0 < 0.0) throw std::invalid_argument("train config: lr0 must be non-negative");
    if (gamma < 0.0) throw std::invalid_argument("train config: gamma must be non-negative");
    if (n_maps < 1) throw std::invalid_argument("train config: n_maps must be >= 1");
    auto mom_ok = [](double m) { return m >= 0.0 && m < 1.0; };
    if (!mom_ok(momentum_filters) || !mom_ok(momentum_head))
      throw std::invalid_argument("train config: momenta must be in [0, 1)");
    if (window_s && !(*window_s > 0.0))
      throw std::invalid_argument("train config: window_s must be positive");
    if (window_s && windows_per_epoch < 1)
      throw std::invalid_argument("train config: windows_per_epoch must be >= 1");
  }
};

// lr(t) = lr0 * 0.5 * (1 + cos(pi t / T)); t = 0 gives lr0, t = T gives 0.
inline double cosine_lr(std::size_t step, std::size_t total_steps, double lr0) {
  if (total_steps < 1) throw std::invalid_argument("cosine_lr: total_steps must be >= 1");
  if (step > total_steps) throw std::invalid_argument("cosine_lr: step past schedule end");
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr0 * 0.5 * (1.0 + std::cos(3.14159265358979323846 * frac));
}

// v <- m v + g;  p <- p - lr (g + m v).
inline void nesterov_step(double& param, double grad, double& velocity, double lr,
                          double momentum) {
  velocity = momentum * velocity + grad;
  param -= lr * (grad + momentum * velocity);
}

inline void nesterov_step(std::vector<double>& params, const std::vector<double>& grads,
                          std::vector<double>& velocities, double lr, double momentum) {
  if (params.size() != grads.size() || params.size() != velocities.size())
    throw std::invalid_argument("nesterov_step: vector lengths differ");
  for (std::size_t i = 0; i < params.size(); ++i)
    nesterov_step(params[i], grads[i], velocities[i], lr, momentum);
}

// Duplicate minority-class indices (seeded random selection for remainders)
// until class counts are equal. Returns an occurrence list over the input
// indices; majority-class entries appear once.
inline std::vector<std::size_t> oversample(const std::vector<int>& labels, Rng& rng) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("oversample: labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty())
    throw std::invalid_argument("oversample: training split contains a single class");

  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = i;

  const int minority = by_class[0].size() < by_class[1].size() ? 0 : 1;
  const std::size_t n_min = by_class[minority].size();
  const std::size_t n_maj = by_class[1 - minority].size();
  if (n_min == n_maj) return out;

  const std::size_t extra_each = n_maj / n_min - 1;
  for (std::size_t rep = 0; rep < extra_each; ++rep)
    for (std::size_t idx : by_class[minority]) out.push_back(idx);

  // Remainder: distinct minority trials chosen at random.
  std::size_t remainder = n_maj - n_min * (extra_each + 1);
  std::vector<std::size_t> pool = by_class[minority];
  rng.shuffle(pool);
  for (std::size_t i = 0; i < remainder; ++i) out.push_back(pool[i]);
  return out;
}

enum class WindowMode { Train, Eval };

// Cut fixed-length windows out of one trial; every window is re-standardized.
// Train mode: windows_per_epoch seeded-uniform random offsets. Eval mode:
// consecutive non-overlapping windows from the start, remainder discarded.
inline std::vector<TrialTensor> sample_windows(const TrialTensor& trial, WindowMode mode,
                                               double window_s, std::size_t windows_per_epoch,
                                               Rng* rng) {
  const std::size_t W = static_cast<std::size_t>(std::llround(window_s * trial.fs));
  if (W < 1) throw std::invalid_argument("sample_windows: window shorter than one sample");
  const std::size_t N = trial.n_samples();
  if (N < W) throw std::invalid_argument("sample_windows: trial shorter than the window");

  auto cut = [&](std::size_t offset) {
    Mat w(trial.n_channels(), W);
    for (std::size_t c = 0; c < trial.n_channels(); ++c)
      std::copy(trial.data.row(c) + offset, trial.data.row(c) + offset + W, w.row(c));
    TrialTensor t = standardize_trial(w, trial.fs, trial.label, trial.subject_id,
                                      trial.trial_id + "@" + std::to_string(offset));
    return t;
  };

  std::vector<TrialTensor> out;
  if (mode == WindowMode::Eval) {
    for (std::size_t off = 0; off + W <= N; off += W) out.push_back(cut(off));
    return out;
  }
  if (!rng) throw std::invalid_argument("sample_windows: train mode needs an rng");
  for (std::size_t i = 0; i < windows_per_epoch; ++i) out.push_back(cut(rng->below(N - W + 1)));
  return out;
}

// One optimizer step over all trainables: filter parameters use the filter
// momentum, head parameters the head momentum, then the clamp projection
// (velocities untouched by the projection).
inline void optimizer_step(ModelState& state, const GradientTape& tape, double lr,
                           double momentum_filters, double momentum_head,
                           const ClampBounds& bounds) {
  for (std::size_t f = 0; f < state.bank.n_filters(); ++f) {
    nesterov_step(state.bank.params[f].mu, tape.d_mu[f], state.vel_mu[f], lr, momentum_filters);
    nesterov_step(state.bank.params[f].h, tape.d_h[f], state.vel_h[f], lr, momentum_filters);
    nesterov_step(state.bank.params[f].beta_raw, tape.d_beta_raw[f], state.vel_beta[f], lr,
                  momentum_filters);
  }
  nesterov_step(state.head.weights, tape.d_weights, state.vel_weights, lr, momentum_head);
  nesterov_step(state.head.bias, tape.d_bias, state.vel_bias, lr, momentum_head);
  clamp_bank(state.bank, bounds);
  ++state.step_counter;
}

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_uar = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ModelState state;
  std::vector<EpochStats> history;
};

namespace detail {

// Batches of >= 2 samples a group of this size yields under a batch size.
inline std::size_t batches_in_group(std::size_t count, std::size_t batch_size) {
  const std::size_t full = count / batch_size;
  const std::size_t rem = count % batch_size;
  return full + (rem >= 2 ? 1 : 0);
}

}  // namespace detail

// Full training loop. Trials are expected standardized (as load_dataset
// produces them); degenerate trials are skipped. Deterministic for a fixed
// config, seed and trial order.
inline TrainResult train(const TrainConfig& cfg, const std::vector<TrialTensor>& trials) {
  cfg.validate();
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < trials.size(); ++i)
    if (!trials[i].degenerate) usable.push_back(i);
  if (usable.empty()) throw std::invalid_argument("train: no usable trials");

  const double fs = trials[usable[0]].fs;
  const std::size_t C = trials[usable[0]].n_channels();
  for (std::size_t i : usable) {
    if (trials[i].fs != fs) throw std::invalid_argument("train: trials disagree on fs");
    if (trials[i].n_channels() != C)
      throw std::invalid_argument("train: trials disagree on channel count");
  }

  std::vector<int> labels;
  labels.reserve(usable.size());
  for (std::size_t i : usable) labels.push_back(trials[i].label);

  std::vector<std::size_t> occurrences;  // indices into usable
  if (cfg.oversample_train) {
    Rng os_rng(mix_seed(cfg.seed, 0x05E5));
    occurrences = oversample(labels, os_rng);
  } else {
    occurrences.resize(usable.size());
    for (std::size_t i = 0; i < usable.size(); ++i) occurrences[i] = i;
  }

  ModelState state = init_model(cfg.feature_kind, C, cfg.n_maps);
  state.bn.mode = BnMode::Train;
  const ClampBounds bounds = cfg.clamp_bounds.value_or(ClampBounds::for_sample_rate(fs));
  clamp_bank(state.bank, bounds);

  // Without windowing the spectra are fixed; prepare them once.
  std::vector<PreparedTrial> fixed;
  if (!cfg.window_s) {
    fixed.resize(usable.size());
    for (std::size_t i = 0; i < usable.size(); ++i) fixed[i] = prepare_trial(trials[usable[i]]);
  }

  // The per-epoch sample multiset is fixed, so the step count is exact.
  std::size_t steps_per_epoch = 0;
  {
    std::map<std::size_t, std::size_t> length_counts;
    for (std::size_t occ : occurrences) {
      const TrialTensor& t = trials[usable[occ]];
      if (cfg.window_s) {
        const auto W = static_cast<std::size_t>(std::llround(*cfg.window_s * fs));
        if (t.n_samples() < W)
          throw std::invalid_argument("train: trial '" + t.trial_id + "' shorter than window");
        length_counts[W] += cfg.windows_per_epoch;
      } else {
        length_counts[t.n_samples()] += 1;
      }
    }
    for (const auto& [len, count] : length_counts)
      steps_per_epoch += detail::batches_in_group(count, cfg.batch_size);
  }
  if (steps_per_epoch == 0) throw std::invalid_argument("train: not enough samples for a batch");
  const std::size_t total_steps = cfg.epochs * steps_per_epoch;

  TrainResult result;
  std::size_t global_step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng ep_rng(mix_seed(cfg.seed, 0xE70C4, epoch));

    // Windowed samples need stable TrialTensor storage behind the prepared
    // spectra (prepare_trial keeps a pointer to its trial).
    std::deque<TrialTensor> trial_storage;
    std::deque<PreparedTrial> window_storage;
    std::vector<const PreparedTrial*> samples;
    for (std::size_t occ : occurrences) {
      if (!cfg.window_s) {
        samples.push_back(&fixed[occ]);
        continue;
      }
      const TrialTensor& t = trials[usable[occ]];
      auto windows =
          sample_windows(t, WindowMode::Train, *cfg.window_s, cfg.windows_per_epoch, &ep_rng);
      for (auto& w : windows) {
        if (w.degenerate) continue;
        trial_storage.push_back(std::move(w));
        window_storage.push_back(prepare_trial(trial_storage.back()));
        samples.push_back(&window_storage.back());
      }
    }

    ep_rng.shuffle(samples);

    // Group by window length (buckets in order of first appearance).
    std::vector<std::size_t> bucket_lengths;
    std::vector<std::vector<const PreparedTrial*>> buckets;
    for (const PreparedTrial* s : samples) {
      const std::size_t len = s->spectrum.n_samples;
      std::size_t b = 0;
      for (; b < bucket_lengths.size(); ++b)
        if (bucket_lengths[b] == len) break;
      if (b == bucket_lengths.size()) {
        bucket_lengths.push_back(len);
        buckets.emplace_back();
      }
      buckets[b].push_back(s);
    }

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    std::vector<int> epoch_pred, epoch_truth;
    double last_lr = 0.0;

    for (const auto& bucket : buckets) {
      for (std::size_t start = 0; start < bucket.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(start + cfg.batch_size, bucket.size());
        if (end - start < 2) continue;  // batch norm needs at least 2
        std::vector<const PreparedTrial*> batch(bucket.begin() + start, bucket.begin() + end);

        const double lr = cosine_lr(std::min(global_step, total_steps), total_steps, cfg.lr0);
        last_lr = lr;
        BackwardResult res = backward_batch(batch, state, cfg.gamma);
        optimizer_step(state, res.tape, lr, cfg.momentum_filters, cfg.momentum_head, bounds);

        loss_sum += res.loss * static_cast<double>(batch.size());
        loss_count += batch.size();
        for (std::size_t i = 0; i < batch.size(); ++i) {
          epoch_pred.push_back(res.probs[i] > 0.5 ? 1 : 0);
          epoch_truth.push_back(batch[i]->trial->label);
        }
        ++global_step;
      }
    }

    EpochStats row;
    row.epoch = epoch;
    row.mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    row.train_uar = uar(epoch_pred, epoch_truth);
    row.lr = last_lr;
    result.history.push_back(row);
  }

  state.bn.mode = BnMode::Eval;  // ready for evaluation with running stats
  result.state = std::move(state);
  return result;
}

}  // namespace eegminer
