#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "eegminer/gradient.hpp"
#include "eegminer/serialize.hpp"
#include "eegminer/stats.hpp"
#include "eegminer/trainer.hpp"

namespace eegminer {

// Subject-held-out cross-validation, validation-window prediction averaging
// and the statistical feature-validation exports.

struct EvalResult {
  double val_uar = 0.0;
  std::vector<double> trial_probs;  // window-averaged sigmoid probabilities
  std::vector<int> trial_pred;
  std::vector<int> trial_truth;
  std::vector<std::string> trial_ids;
};

namespace detail {

// Responses are parameter-dependent but trial-independent; share them across
// all windows of one length.
class ResponseCache {
 public:
  explicit ResponseCache(const FilterBank& bank) : bank_(bank) {}

  const BankResponses& for_length(std::size_t n, double fs) {
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    const auto freqs = make_bin_freqs(n, fs);
    return cache_.emplace(n, compute_bank_responses(bank_, freqs, /*with_grads=*/false))
        .first->second;
  }

 private:
  const FilterBank& bank_;
  std::map<std::size_t, BankResponses> cache_;
};

inline double eval_probability(const ModelState& model, const FeatureVector& feats) {
  Mat row(1, feats.values.size());
  for (std::size_t d = 0; d < feats.values.size(); ++d) row(0, d) = feats.values[d];
  BatchNormState bn = model.bn;
  bn.mode = BnMode::Eval;
  const Mat std_row = batchnorm_apply(row, bn, nullptr);
  return predict(std_row, model.head)[0];
}

}  // namespace detail

// Per trial: sigmoid probabilities over consecutive non-overlapping windows
// are arithmetically averaged and thresholded at 0.5 (ties go to class 0).
inline EvalResult evaluate(const ModelState& model, const std::vector<TrialTensor>& val_trials,
                           std::optional<double> window_s) {
  if (val_trials.empty()) throw std::invalid_argument("evaluate: empty validation set");
  detail::ResponseCache cache(model.bank);
  EvalResult out;
  for (const auto& trial : val_trials) {
    std::vector<TrialTensor> windows;
    if (window_s) windows = sample_windows(trial, WindowMode::Eval, *window_s, 0, nullptr);
    else windows.push_back(trial);

    double prob_sum = 0.0;
    std::size_t used = 0;
    for (const auto& w : windows) {
      if (w.degenerate) continue;
      const PreparedTrial pt = prepare_trial(w);
      const BankResponses& R = cache.for_length(pt.spectrum.n_samples, w.fs);
      const FeatureVector feats = forward_features(pt, model.bank, R, model.kind);
      prob_sum += detail::eval_probability(model, feats);
      ++used;
    }
    if (used == 0) throw std::invalid_argument("evaluate: trial '" + trial.trial_id +
                                               "' has no usable windows");
    const double prob = prob_sum / static_cast<double>(used);
    out.trial_probs.push_back(prob);
    out.trial_pred.push_back(prob > 0.5 ? 1 : 0);
    out.trial_truth.push_back(trial.label);
    out.trial_ids.push_back(trial.trial_id);
  }
  out.val_uar = uar(out.trial_pred, out.trial_truth);
  return out;
}

struct FoldReport {
  std::size_t fold_index = 0;
  std::vector<std::string> train_subjects;
  std::vector<std::string> val_subjects;
  double val_uar = 0.0;
  std::vector<EpochStats> history;
  ModelState state;
  EvalResult eval;
};

struct CvSummary {
  std::size_t n_folds = 0;
  double mean_uar = 0.0;
  double std_uar = 0.0;  // sample std across folds
  std::vector<double> fold_uars;
};

struct CvResult {
  std::vector<FoldReport> folds;
  CvSummary summary;
};

// Subjects partitioned into seeded random folds, sizes as equal as possible
// (remainder subjects land in the first folds).
inline std::vector<std::vector<std::string>> partition_subjects(
    std::vector<std::string> subjects, std::size_t n_folds, Rng& rng) {
  if (subjects.size() < n_folds)
    throw std::invalid_argument(
        "cross_validate: fewer subjects than folds; lower the fold count (--folds)");
  rng.shuffle(subjects);
  std::vector<std::vector<std::string>> folds(n_folds);
  const std::size_t base = subjects.size() / n_folds;
  const std::size_t rem = subjects.size() % n_folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < n_folds; ++f) {
    const std::size_t take = base + (f < rem ? 1 : 0);
    for (std::size_t i = 0; i < take; ++i) folds[f].push_back(subjects[pos++]);
  }
  return folds;
}

// Trains one model per fold on the training subjects only (oversampling
// happens inside train(), strictly after the split) and evaluates on the
// held-out subjects. Folds are independent; jobs > 1 runs them on threads
// with identical results.
inline CvResult cross_validate(const TrainConfig& cfg, const std::vector<TrialTensor>& dataset,
                               std::size_t n_folds = 10, std::size_t jobs = 1) {
  if (dataset.empty()) throw std::invalid_argument("cross_validate: empty dataset");
  if (n_folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");

  std::vector<std::string> subjects;
  for (const auto& t : dataset)
    if (std::find(subjects.begin(), subjects.end(), t.subject_id) == subjects.end())
      subjects.push_back(t.subject_id);

  Rng fold_rng(mix_seed(cfg.seed, 0xF01D5));
  const auto val_subject_sets = partition_subjects(subjects, n_folds, fold_rng);

  CvResult result;
  result.folds.resize(n_folds);

  auto run_fold = [&](std::size_t f) {
    const auto& val_set = val_subject_sets[f];
    auto in_val = [&](const std::string& s) {
      return std::find(val_set.begin(), val_set.end(), s) != val_set.end();
    };
    std::vector<TrialTensor> train_trials, val_trials;
    for (const auto& t : dataset) (in_val(t.subject_id) ? val_trials : train_trials).push_back(t);
    if (train_trials.empty() || val_trials.empty())
      throw std::invalid_argument("cross_validate: degenerate fold split");

    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = mix_seed(cfg.seed, 0xF07D, f);  // order-independent fold seed
    TrainResult tr = train(fold_cfg, train_trials);
    EvalResult ev = evaluate(tr.state, val_trials, cfg.window_s);

    FoldReport& report = result.folds[f];
    report.fold_index = f;
    for (const auto& s : subjects)
      (in_val(s) ? report.val_subjects : report.train_subjects).push_back(s);
    report.val_uar = ev.val_uar;
    report.history = std::move(tr.history);
    report.state = std::move(tr.state);
    report.eval = std::move(ev);
  };

  if (jobs <= 1) {
    for (std::size_t f = 0; f < n_folds; ++f) run_fold(f);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    for (std::size_t w = 0; w < std::min(jobs, n_folds); ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t f = next.fetch_add(1); f < n_folds; f = next.fetch_add(1)) run_fold(f);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  CvSummary& s = result.summary;
  s.n_folds = n_folds;
  for (const auto& fold : result.folds) s.fold_uars.push_back(fold.val_uar);
  s.mean_uar = mean_of(s.fold_uars);
  s.std_uar = std::sqrt(sample_var(s.fold_uars));
  return result;
}

inline json cv_summary_to_json(const CvResult& cv) {
  json j;
  j["n_folds"] = cv.summary.n_folds;
  j["mean_val_uar"] = cv.summary.mean_uar;
  j["std_val_uar"] = cv.summary.std_uar;
  j["fold_val_uars"] = cv.summary.fold_uars;
  return j;
}

inline json fold_report_to_json(const FoldReport& r) {
  json j;
  j["fold_index"] = r.fold_index;
  j["train_subjects"] = r.train_subjects;
  j["val_subjects"] = r.val_subjects;
  j["val_uar"] = r.val_uar;
  j["trial_probs"] = r.eval.trial_probs;
  j["trial_pred"] = r.eval.trial_pred;
  j["trial_truth"] = r.eval.trial_truth;
  j["trial_ids"] = r.eval.trial_ids;
  return j;
}

// ---------------------------------------------------------------------------
// Grand-averaged magnitude profiles: per channel and frequency, the relative
// change (A - B)/B between class grand averages of |X| on a common grid (the
// native bin grid of the most common trial length; other lengths are linearly
// interpolated).
// ---------------------------------------------------------------------------

struct MagnitudeProfile {
  std::vector<double> freqs;
  Mat relative_change;  // [C x F]
  Mat defined;          // 1 where the denominator was nonzero
};

inline MagnitudeProfile magnitude_profile_relative_change(
    const std::vector<TrialTensor>& trials, int class_a, int class_b) {
  if (trials.empty()) throw std::invalid_argument("magnitude_profile: empty dataset");
  std::map<std::size_t, std::size_t> length_votes;
  for (const auto& t : trials) ++length_votes[t.n_samples()];
  std::size_t common_n = 0, best = 0;
  for (const auto& [len, count] : length_votes)
    if (count > best) {
      best = count;
      common_n = len;
    }
  const double fs = trials[0].fs;
  const std::size_t C = trials[0].n_channels();
  const std::vector<double> grid = make_bin_freqs(common_n, fs);
  const std::size_t F = grid.size();

  Mat sums[2] = {Mat(C, F, 0.0), Mat(C, F, 0.0)};
  std::size_t counts[2] = {0, 0};
  bool seen[2] = {false, false};
  for (const auto& t : trials) {
    int cls;
    if (t.label == class_a) cls = 0;
    else if (t.label == class_b) cls = 1;
    else continue;
    if (t.degenerate) continue;
    seen[cls] = true;
    const Spectrum s = rfft(t);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < F; ++k) {
        const double f = grid[k];
        double value;
        if (s.n_samples == common_n) {
          value = std::abs(s.bins(c, k));
        } else {
          // Linear interpolation on this trial's native grid.
          const double pos = f * static_cast<double>(s.n_samples) / fs;
          const std::size_t k0 = std::min(static_cast<std::size_t>(pos), s.n_bins() - 1);
          const std::size_t k1 = std::min(k0 + 1, s.n_bins() - 1);
          const double frac = pos - static_cast<double>(k0);
          value = (1.0 - frac) * std::abs(s.bins(c, k0)) + frac * std::abs(s.bins(c, k1));
        }
        sums[cls](c, k) += value;
      }
    }
    ++counts[cls];
  }
  if (!seen[0] || !seen[1])
    throw std::invalid_argument("magnitude_profile: a class has no trials");

  MagnitudeProfile out;
  out.freqs = grid;
  out.relative_change = Mat(C, F, 0.0);
  out.defined = Mat(C, F, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < F; ++k) {
      const double a = sums[0](c, k) / static_cast<double>(counts[0]);
      const double b = sums[1](c, k) / static_cast<double>(counts[1]);
      if (b > 0.0) {
        out.relative_change(c, k) = (a - b) / b;
        out.defined(c, k) = 1.0;
      }
    }
  }
  return out;
}

inline void write_profile_csv(const MagnitudeProfile& p,
                              const std::vector<std::string>& channel_names,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_profile_csv: cannot open " + path);
  out << "channel";
  for (double f : p.freqs) out << "," << f;
  out << "\n";
  for (std::size_t c = 0; c < p.relative_change.rows; ++c) {
    out << (c < channel_names.size() ? channel_names[c] : "ch" + std::to_string(c));
    for (std::size_t k = 0; k < p.relative_change.cols; ++k)
      out << "," << (p.defined(c, k) > 0.0 ? std::to_string(p.relative_change(c, k)) : "nan");
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Interpretation bundle: trained filters, classifier weights as importance
// scores, raw per-class distributions and t-tests of the top-|weight|
// features.
// ---------------------------------------------------------------------------

struct TopFeature {
  std::size_t index = 0;
  double weight = 0.0;
  FeatureIndexEntry entry;
  std::vector<double> class0_values;
  std::vector<double> class1_values;
  bool ttest_valid = false;
  TTestResult ttest;
};

struct InterpretationBundle {
  bool empty_topk = false;  // all weights zero
  std::vector<TopFeature> top;  // ranked by |weight|, descending
  Mat raw_features;             // [n_trials x D]
  std::vector<int> labels;
};

inline InterpretationBundle export_interpretation(const ModelState& model,
                                                  const std::vector<TrialTensor>& trials,
                                                  std::size_t top_k = 10) {
  if (trials.empty()) throw std::invalid_argument("export_interpretation: empty dataset");
  const std::size_t D = model.head.weights.size();
  detail::ResponseCache cache(model.bank);

  InterpretationBundle out;
  out.raw_features = Mat(trials.size(), D, 0.0);
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const PreparedTrial pt = prepare_trial(trials[i]);
    const BankResponses& R = cache.for_length(pt.spectrum.n_samples, trials[i].fs);
    const FeatureVector f = forward_features(pt, model.bank, R, model.kind);
    for (std::size_t d = 0; d < D; ++d) out.raw_features(i, d) = f.values[d];
    out.labels.push_back(trials[i].label);
  }

  std::vector<std::size_t> order(D);
  for (std::size_t d = 0; d < D; ++d) order[d] = d;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(model.head.weights[a]) > std::fabs(model.head.weights[b]);
  });

  const auto entries = feature_index_map(model.kind, model.bank.n_channels, model.bank.n_maps);
  for (std::size_t rank = 0; rank < std::min(top_k, D); ++rank) {
    const std::size_t d = order[rank];
    if (model.head.weights[d] == 0.0) break;  // zero-weight features never enter the top list
    TopFeature tf;
    tf.index = d;
    tf.weight = model.head.weights[d];
    tf.entry = entries[d];
    for (std::size_t i = 0; i < trials.size(); ++i)
      (out.labels[i] == 0 ? tf.class0_values : tf.class1_values)
          .push_back(out.raw_features(i, d));
    if (tf.class0_values.size() >= 2 && tf.class1_values.size() >= 2) {
      try {
        tf.ttest = two_sample_ttest(tf.class0_values, tf.class1_values);
        tf.ttest_valid = true;
      } catch (const std::invalid_argument&) {
        tf.ttest_valid = false;  // degenerate variance
      }
    }
    out.top.push_back(std::move(tf));
  }
  out.empty_topk = out.top.empty();
  return out;
}

inline json interpretation_to_json(const ModelState& model, const InterpretationBundle& bundle) {
  json j;
  j["feature_kind"] = feature_kind_name(model.kind);
  j["filters"] = json::array();
  for (std::size_t f = 0; f < model.bank.n_filters(); ++f) {
    const auto& p = model.bank.params[f];
    json jf = {{"mu_hz", p.mu},
               {"h_hz", p.h},
               {"beta_raw", p.beta_raw},
               {"beta_eff", beta_eff_of(p)},
               {"map", model.bank.layout == BankLayout::PerElectrode
                           ? f / model.bank.n_channels
                           : f}};
    if (model.bank.layout == BankLayout::PerElectrode)
      jf["channel"] = f % model.bank.n_channels;
    else
      jf["channel"] = "shared";
    j["filters"].push_back(jf);
  }
  j["weights"] = model.head.weights;
  j["bias"] = model.head.bias;
  j["index_map"] =
      feature_index_map_to_json(model.kind, model.bank.n_channels, model.bank.n_maps);
  j["empty_topk_warning"] = bundle.empty_topk;
  j["top_features"] = json::array();
  for (const auto& tf : bundle.top) {
    json jt = {{"index", tf.index},
               {"weight", tf.weight},
               {"map", tf.entry.map},
               {"channel_a", tf.entry.channel_a},
               {"channel_b", tf.entry.channel_b}};
    if (tf.ttest_valid) {
      jt["t"] = tf.ttest.t;
      jt["p"] = tf.ttest.p;
      jt["df"] = tf.ttest.df;
    }
    j["top_features"].push_back(jt);
  }
  return j;
}

// Raw feature distributions of the top features: one row per (feature, class),
// samples as the remaining columns.
inline void write_distributions_csv(const InterpretationBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_distributions_csv: cannot open " + path);
  out << "feature_index,class,values...\n";
  for (const auto& tf : bundle.top) {
    for (int cls = 0; cls < 2; ++cls) {
      out << tf.index << "," << cls;
      for (double v : (cls == 0 ? tf.class0_values : tf.class1_values)) out << "," << v;
      out << "\n";
    }
  }
}

inline void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
  out << "epoch,mean_loss,train_uar,lr\n";
  for (const auto& row : history)
    out << row.epoch << "," << row.mean_loss << "," << row.train_uar << "," << row.lr << "\n";
}

}  // namespace eegminer
