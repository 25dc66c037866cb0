// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line; the exit
// code is the number of failed criteria. Run with a list of criterion numbers
// or "all".

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eegminer/dataset.hpp"
#include "eegminer/eval.hpp"
#include "eegminer/gradient.hpp"
#include "eegminer/serialize.hpp"
#include "eegminer/stats.hpp"
#include "eegminer/trainer.hpp"

using namespace eegminer;

namespace {

constexpr std::size_t kJobs = 2;

// ---- shared task definitions ------------------------------------------------

SynthSpec magnitude_task_spec(std::uint64_t seed, bool with_effect, double subject_sigma) {
  SynthSpec spec;
  spec.n_subjects = 40;
  spec.trials_per_subject = 4;
  spec.n_channels = 8;
  spec.fs = 128.0;
  spec.duration_s = 20.0;
  spec.noise_level = 1.0;
  spec.effect_amplitude = 0.5;
  spec.subject_gain_sigma = subject_sigma;
  spec.seed = seed;
  if (with_effect) {
    PlantedEffect e;
    e.kind = EffectKind::MagnitudeBoost;
    e.channel_a = 3;
    e.band_lo_hz = 8.0;
    e.band_hi_hz = 13.0;
    e.gain = 4.0;
    spec.effects.push_back(e);
  }
  return spec;
}

TrainConfig magnitude_task_config(double gamma = 0.0) {
  TrainConfig cfg;
  cfg.feature_kind = FeatureKind::Magnitude;
  cfg.n_maps = 2;
  cfg.epochs = 300;
  cfg.batch_size = 8;
  cfg.lr0 = 2.8e-2;  // compensates for the short schedule (~5.4k update steps)
  cfg.gamma = gamma;
  cfg.seed = 99;
  return cfg;
}

double band_center_hz() { return 10.5; }

// ---- criteria ---------------------------------------------------------------

bool criterion_parameter_counts(std::string& detail) {
  struct Row {
    FeatureKind kind;
    std::size_t C, K, expected;
  };
  const std::vector<Row> rows = {
      {FeatureKind::Magnitude, 14, 2, 113},  {FeatureKind::Correlation, 14, 2, 267},
      {FeatureKind::Plv, 14, 2, 189},        {FeatureKind::Magnitude, 62, 2, 497},
      {FeatureKind::Correlation, 62, 2, 4155}, {FeatureKind::Plv, 62, 2, 3789}};
  std::ostringstream oss;
  bool ok = true;
  for (const auto& r : rows) {
    const std::size_t got = count_parameters(r.kind, r.C, r.K);
    if (got != r.expected) ok = false;
    oss << feature_kind_name(r.kind) << "(" << r.C << "," << r.K << ")=" << got << " ";
  }
  detail = oss.str() + (ok ? "- all exact" : "- MISMATCH");
  return ok;
}

bool criterion_filter_anchors(std::string& detail) {
  Rng rng(2024);
  double worst_center = 0.0, worst_half = 0.0;
  for (int i = 0; i < 100; ++i) {
    FilterParams p;
    p.mu = rng.uniform(2.0, 60.0);
    p.h = rng.uniform(2.0, 50.0);
    p.beta_raw = rng.uniform(2.0, 3.0);
    const auto mags = filter_magnitude(p, {p.mu, p.mu - p.h / 2.0, p.mu + p.h / 2.0});
    worst_center = std::max(worst_center, std::fabs(mags[0] - 1.0));
    worst_half = std::max(worst_half, std::fabs(mags[1] - 0.5));
    worst_half = std::max(worst_half, std::fabs(mags[2] - 0.5));
  }
  std::ostringstream oss;
  oss << "max ||F(mu)|-1| = " << worst_center << ", max ||F(mu+-h/2)|-0.5| = " << worst_half;
  detail = oss.str();
  return worst_center <= 1e-12 && worst_half <= 1e-12;
}

bool criterion_sinc_limit(std::string& detail) {
  auto width = [](double beta_eff) {
    FilterParams p{23.0, 44.0, (beta_eff + 14.0) / 8.0};
    double first_below_09 = -1.0;
    for (double x = p.mu; x < p.mu + 4.0 * p.h; x += 0.1) {
      const double m = filter_magnitude(p, {x})[0];
      if (first_below_09 < 0.0 && m < 0.9) first_below_09 = x;
      if (m < 0.1) return x - first_below_09;
    }
    return -1.0;
  };
  std::ostringstream oss;
  double prev = 1e300;
  bool monotone = true;
  std::map<int, double> widths;
  for (double beta : {2.0, 4.0, 6.0, 8.0, 10.0}) {
    const double w = width(beta);
    widths[static_cast<int>(beta)] = w;
    if (w >= prev || w < 0.0) monotone = false;
    prev = w;
    oss << "w(" << beta << ")=" << w << " ";
  }
  const bool ratio_ok = widths[10] < 0.30 * widths[2];
  oss << "ratio " << widths[10] / widths[2];
  detail = oss.str();
  return monotone && ratio_ok;
}

bool criterion_plv_identity(std::string& detail) {
  Rng rng(31337);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t T = 200 + rng.below(1800);
    CMat a(2, T);
    for (auto& z : a.v) z = std::complex<double>(rng.gauss(), rng.gauss());
    const FeatureVector f = plv_features({a});
    const double direct = plv_direct_oracle(a.row(0), a.row(1), T);
    worst = std::max(worst, std::fabs(f.values[0] - direct));
  }
  std::ostringstream oss;
  oss << "max |plv - direct| = " << worst << " over 100 pairs";
  detail = oss.str();
  return worst < 1e-10;
}

bool criterion_gradient_check(std::string& detail) {
  const std::size_t C = 3, K = 1, N = 64, B = 4;
  const double fs = 128.0;
  std::ostringstream oss;
  bool ok = true;
  for (FeatureKind kind : {FeatureKind::Magnitude, FeatureKind::Correlation, FeatureKind::Plv}) {
    Rng rng(400 + static_cast<int>(kind));
    std::vector<TrialTensor> trials;
    for (std::size_t i = 0; i < B; ++i) {
      Mat raw(C, N);
      for (auto& x : raw.v) x = rng.gauss();
      trials.push_back(standardize_trial(raw, fs, static_cast<int>(i % 2)));
    }
    std::vector<PreparedTrial> prepared(B);
    std::vector<const PreparedTrial*> batch(B);
    for (std::size_t i = 0; i < B; ++i) {
      prepared[i] = prepare_trial(trials[i]);
      batch[i] = &prepared[i];
    }
    ModelState st = init_model(kind, C, K);
    for (auto& p : st.bank.params) {
      p.mu = rng.uniform(8.0, 40.0);
      p.h = rng.uniform(6.0, 30.0);
      p.beta_raw = rng.uniform(2.05, 2.95);
    }
    for (auto& w : st.head.weights) w = rng.gauss() * 0.7;
    st.head.bias = rng.gauss() * 0.2;

    const double gamma = 1e-3;
    const BackwardResult res = backward_batch(batch, st, gamma, /*update_running=*/false);

    double worst = 0.0;
    std::size_t checked = 0;
    const double step = 1e-4;
    auto compare = [&](double analytic, double* param) {
      const double saved = *param;
      *param = saved + step;
      const double lp = forward_loss(batch, st, gamma);
      *param = saved - step;
      const double lm = forward_loss(batch, st, gamma);
      *param = saved;
      const double fd = (lp - lm) / (2.0 * step);
      if (std::fabs(analytic) <= 1e-8 && std::fabs(fd) <= 1e-8) return;
      ++checked;
      worst = std::max(worst, std::fabs(analytic - fd) /
                                  std::max({std::fabs(analytic), std::fabs(fd), 1e-12}));
    };
    for (std::size_t f = 0; f < st.bank.n_filters(); ++f) {
      compare(res.tape.d_mu[f], &st.bank.params[f].mu);
      compare(res.tape.d_h[f], &st.bank.params[f].h);
      compare(res.tape.d_beta_raw[f], &st.bank.params[f].beta_raw);
    }
    for (std::size_t d = 0; d < st.head.weights.size(); ++d)
      compare(res.tape.d_weights[d], &st.head.weights[d]);
    compare(res.tape.d_bias, &st.head.bias);

    oss << feature_kind_name(kind) << ": worst rel err " << worst << " (" << checked
        << " params)  ";
    if (worst >= 1e-3 || checked == 0) ok = false;
  }
  detail = oss.str();
  return ok;
}

bool criterion_magnitude_recovery(std::string& detail) {
  const auto trials = to_trials(generate_synthetic(magnitude_task_spec(606, true, 0.1)));
  const CvResult cv = cross_validate(magnitude_task_config(), trials, 10, kJobs);
  std::size_t top_ok = 0, mu_ok = 0;
  for (const auto& fold : cv.folds) {
    const InterpretationBundle b = export_interpretation(fold.state, trials, 1);
    if (b.top.empty()) continue;
    const auto& tf = b.top[0];
    const bool on_channel = tf.entry.channel_a == 3;
    const auto& p =
        fold.state.bank.params[fold.state.bank.filter_index(tf.entry.channel_a, tf.entry.map)];
    if (on_channel) ++top_ok;
    if (on_channel && std::fabs(p.mu - band_center_hz()) <= 2.0) ++mu_ok;
  }
  std::ostringstream oss;
  oss << "mean UAR " << cv.summary.mean_uar << ", top feature on planted channel " << top_ok
      << "/10, |mu - 10.5| <= 2 Hz in " << mu_ok << "/10";
  detail = oss.str();
  return cv.summary.mean_uar >= 0.90 && top_ok == 10 && mu_ok == 10;
}

bool criterion_correlation_recovery(std::string& detail) {
  SynthSpec spec;
  spec.n_subjects = 40;
  spec.trials_per_subject = 4;
  spec.n_channels = 8;
  spec.fs = 128.0;
  spec.duration_s = 20.0;
  spec.effect_amplitude = 2.0;
  spec.seed = 707;
  PlantedEffect e;
  e.kind = EffectKind::CorrelationLink;
  e.channel_a = 2;
  e.channel_b = 5;
  e.band_lo_hz = 8.0;
  e.band_hi_hz = 13.0;
  e.strength = 0.8;
  spec.effects.push_back(e);
  const auto trials = to_trials(generate_synthetic(spec));

  TrainConfig cfg;
  cfg.feature_kind = FeatureKind::Correlation;
  cfg.n_maps = 2;
  cfg.epochs = 60;
  cfg.batch_size = 16;
  cfg.lr0 = 2e-3;
  cfg.seed = 99;
  const CvResult cv = cross_validate(cfg, trials, 10, kJobs);
  std::size_t pair_ok = 0;
  for (const auto& fold : cv.folds) {
    const InterpretationBundle b = export_interpretation(fold.state, trials, 1);
    if (b.top.empty()) continue;
    if (b.top[0].entry.channel_a == 2 && b.top[0].entry.channel_b == 5) ++pair_ok;
  }
  std::ostringstream oss;
  oss << "mean UAR " << cv.summary.mean_uar << ", top feature is planted pair in " << pair_ok
      << "/10 folds";
  detail = oss.str();
  return cv.summary.mean_uar >= 0.85 && pair_ok >= 8;
}

bool criterion_null_experiment(std::string& detail) {
  const auto trials = to_trials(generate_synthetic(magnitude_task_spec(1234, false, 0.1)));
  const CvResult cv = cross_validate(magnitude_task_config(), trials, 10, kJobs);
  std::ostringstream oss;
  oss << "mean UAR " << cv.summary.mean_uar << " +- " << cv.summary.std_uar
      << " with no planted effects";
  detail = oss.str();
  return cv.summary.mean_uar >= 0.40 && cv.summary.mean_uar <= 0.60;
}

bool criterion_l1_sparsification(std::string& detail) {
  // Same magnitude-recovery construction with lower subject-gain sigma:
  // strong per-channel gain noise gives the non-planted features a genuine
  // noise-cancellation role whose weight gamma = 2e-3 cannot push under the
  // threshold, which would mask the sparsification being measured here.
  const auto trials = to_trials(generate_synthetic(magnitude_task_spec(606, true, 0.02)));
  double uar[2] = {0.0, 0.0};
  double active[2] = {0.0, 0.0};
  const double gammas[2] = {0.0, 2e-3};
  for (int i = 0; i < 2; ++i) {
    const CvResult cv = cross_validate(magnitude_task_config(gammas[i]), trials, 10, kJobs);
    uar[i] = cv.summary.mean_uar;
    for (const auto& fold : cv.folds)
      for (double w : fold.state.head.weights)
        if (std::fabs(w) > 1e-3) active[i] += 1.0;
    active[i] /= 10.0;
  }
  std::ostringstream oss;
  oss << "active weights " << active[0] << " -> " << active[1] << " ("
      << 100.0 * (1.0 - active[1] / active[0]) << "% drop), mean UAR " << uar[0] << " -> "
      << uar[1];
  detail = oss.str();
  return active[1] <= 0.75 * active[0] && uar[0] - uar[1] <= 0.05;
}

bool criterion_determinism(std::string& detail) {
  const auto trials = to_trials(generate_synthetic(magnitude_task_spec(606, true, 0.1)));
  const TrainConfig cfg = magnitude_task_config();
  const CvResult a = cross_validate(cfg, trials, 10, kJobs);
  const CvResult b = cross_validate(cfg, trials, 10, kJobs);
  const std::string sa = cv_summary_to_json(a).dump(2);
  const std::string sb = cv_summary_to_json(b).dump(2);
  bool folds_equal = true;
  for (std::size_t f = 0; f < 10; ++f)
    if (fold_report_to_json(a.folds[f]).dump(2) != fold_report_to_json(b.folds[f]).dump(2))
      folds_equal = false;
  std::ostringstream oss;
  oss << "summary JSON " << (sa == sb ? "byte-identical" : "DIFFERS") << ", fold reports "
      << (folds_equal ? "byte-identical" : "DIFFER");
  detail = oss.str();
  return sa == sb && folds_equal;
}

bool criterion_ttest(std::string& detail) {
  const TTestResult r = two_sample_ttest({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0});
  std::ostringstream oss;
  oss << "t = " << r.t << ", p = " << r.p << " (df " << r.df << ")";
  detail = oss.str();
  return std::fabs(r.t - (-1.2247)) <= 1e-3 && std::fabs(r.p - 0.2878) <= 1e-3;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> cs = {
      {1, "parameter-count exactness", criterion_parameter_counts},
      {2, "filter-anchor exactness", criterion_filter_anchors},
      {3, "sinc-limit transition narrowing", criterion_sinc_limit},
      {4, "PLV decomposition identity", criterion_plv_identity},
      {5, "end-to-end gradient check", criterion_gradient_check},
      {6, "synthetic magnitude recovery", criterion_magnitude_recovery},
      {7, "synthetic correlation recovery", criterion_correlation_recovery},
      {8, "null-experiment sanity", criterion_null_experiment},
      {9, "L1 sparsification", criterion_l1_sparsification},
      {10, "determinism", criterion_determinism},
      {11, "two-sample t-test values", criterion_ttest},
  };
  return cs;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "all") {
      for (const auto& c : criteria()) selected.push_back(c.id);
    } else {
      selected.push_back(std::atoi(arg.c_str()));
    }
  }
  if (selected.empty())
    for (const auto& c : criteria()) selected.push_back(c.id);

  int failures = 0;
  for (int id : selected) {
    const Criterion* found = nullptr;
    for (const auto& c : criteria())
      if (c.id == id) found = &c;
    if (!found) {
      std::printf("[FAIL] criterion %d: unknown criterion\n", id);
      ++failures;
      continue;
    }
    std::string detail;
    bool ok = false;
    try {
      ok = found->run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", found->id, found->name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
