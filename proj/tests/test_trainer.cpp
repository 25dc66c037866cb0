#include <catch2/catch.hpp>

#include <cmath>
#include <map>

#include "eegminer/rng.hpp"
#include "eegminer/trainer.hpp"

using namespace eegminer;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Tiny two-class set: class 1 carries a strong 10 Hz tone on channel 0.
std::vector<TrialTensor> planted_trials(std::size_t n_per_class, std::size_t C, std::size_t N,
                                        double fs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrialTensor> out;
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const int label = static_cast<int>(i % 2);
    Mat raw(C, N);
    for (auto& x : raw.v) x = rng.gauss();
    if (label == 1) {
      const double phase = rng.uniform(0.0, 2.0 * kPi);
      for (std::size_t t = 0; t < N; ++t)
        raw(0, t) += 3.0 * std::cos(2.0 * kPi * 10.0 * t / fs + phase);
    }
    TrialTensor t = standardize_trial(raw, fs, label, "s" + std::to_string(i / 4),
                                      "t" + std::to_string(i));
    out.push_back(std::move(t));
  }
  return out;
}

bool states_equal(const ModelState& a, const ModelState& b) {
  if (a.bank.params.size() != b.bank.params.size()) return false;
  for (std::size_t f = 0; f < a.bank.params.size(); ++f) {
    if (a.bank.params[f].mu != b.bank.params[f].mu) return false;
    if (a.bank.params[f].h != b.bank.params[f].h) return false;
    if (a.bank.params[f].beta_raw != b.bank.params[f].beta_raw) return false;
  }
  if (a.head.bias != b.head.bias) return false;
  for (std::size_t d = 0; d < a.head.weights.size(); ++d)
    if (a.head.weights[d] != b.head.weights[d]) return false;
  for (std::size_t d = 0; d < a.bn.running_mean.size(); ++d) {
    if (a.bn.running_mean[d] != b.bn.running_mean[d]) return false;
    if (a.bn.running_var[d] != b.bn.running_var[d]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("cosine_lr endpoints and midpoint") {
  REQUIRE(cosine_lr(0, 100, 2e-3) == Approx(2e-3));
  REQUIRE(cosine_lr(100, 100, 2e-3) == Approx(0.0).margin(1e-18));
  REQUIRE(cosine_lr(50, 100, 2e-3) == Approx(1e-3).epsilon(1e-12));
  REQUIRE_THROWS_AS(cosine_lr(5, 0, 1.0), std::invalid_argument);
}

TEST_CASE("cosine_lr: last training step is within lr0/1000 of zero") {
  const std::size_t T = 300;
  REQUIRE(cosine_lr(T - 1, T, 2e-3) < 1e-3 * 2e-3);
}

TEST_CASE("nesterov_step: momentum 0 is plain SGD; zero gradient is a no-op") {
  double p = 1.0, v = 0.0;
  nesterov_step(p, 0.5, v, 0.1, 0.0);
  REQUIRE(p == Approx(1.0 - 0.1 * 0.5));
  p = 2.0;
  v = 0.0;
  nesterov_step(p, 0.0, v, 0.1, 0.9);
  REQUIRE(p == 2.0);
  REQUIRE(v == 0.0);
}

TEST_CASE("nesterov_step: hand-computed two-step trajectory") {
  const double g = 0.3;
  double p = 5.0, v = 0.0;
  nesterov_step(p, g, v, 1.0, 0.9);
  REQUIRE(v == Approx(g));
  REQUIRE(p == Approx(5.0 - 1.9 * g));
  const double p1 = p;
  nesterov_step(p, g, v, 1.0, 0.9);
  REQUIRE(v == Approx(1.9 * g));
  REQUIRE(p == Approx(p1 - 2.71 * g));
}

TEST_CASE("optimizer_step applies split momenta to filters and head") {
  ModelState st = init_model(FeatureKind::Magnitude, 2, 1);
  GradientTape tape = make_tape(st.bank, st.head.weights.size());
  tape.d_mu = {0.5, 0.0};
  tape.d_h = {0.0, 0.0};
  tape.d_beta_raw = {0.0, 0.0};
  tape.d_weights = {0.2, 0.0};
  tape.d_bias = 0.1;
  const ClampBounds bounds = ClampBounds::for_sample_rate(128.0);
  const double lr = 0.01;

  const double mu0 = st.bank.params[0].mu;
  optimizer_step(st, tape, lr, 0.99, 0.9, bounds);
  optimizer_step(st, tape, lr, 0.99, 0.9, bounds);

  // Filter recurrence with m = 0.99: v1 = g, v2 = 1.99 g.
  const double g = 0.5;
  const double expected_mu = mu0 - lr * (g + 0.99 * g) - lr * (g + 0.99 * 1.99 * g);
  REQUIRE(st.bank.params[0].mu == Approx(expected_mu).epsilon(1e-12));
  REQUIRE(st.vel_mu[0] == Approx(1.99 * g).epsilon(1e-12));

  // Head recurrence with m = 0.9: v1 = g, v2 = 1.9 g.
  const double gw = 0.2;
  const double expected_w = 0.0 - lr * (gw + 0.9 * gw) - lr * (gw + 0.9 * 1.9 * gw);
  REQUIRE(st.head.weights[0] == Approx(expected_w).epsilon(1e-12));
  REQUIRE(st.vel_weights[0] == Approx(1.9 * gw).epsilon(1e-12));
  REQUIRE(st.step_counter == 2);
}

TEST_CASE("optimizer_step: a parameter at a bound with outward gradient stays put") {
  ModelState st = init_model(FeatureKind::Magnitude, 1, 1);
  const ClampBounds bounds = ClampBounds::for_sample_rate(128.0);
  st.bank.params[0].mu = bounds.mu_hi;
  GradientTape tape = make_tape(st.bank, st.head.weights.size());
  tape.d_mu = {-5.0};  // pushes mu upward, out of bounds
  optimizer_step(st, tape, 0.1, 0.99, 0.9, bounds);
  REQUIRE(st.bank.params[0].mu == bounds.mu_hi);
}

TEST_CASE("oversample: balanced input unchanged; (10,5) doubles the minority") {
  Rng rng(1);
  std::vector<int> balanced(20);
  for (std::size_t i = 0; i < 20; ++i) balanced[i] = static_cast<int>(i % 2);
  REQUIRE(oversample(balanced, rng).size() == 20);

  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(0);
  for (int i = 0; i < 5; ++i) labels.push_back(1);
  const auto occ = oversample(labels, rng);
  REQUIRE(occ.size() == 20);
  std::map<std::size_t, int> counts;
  for (auto i : occ) counts[i]++;
  for (int i = 0; i < 10; ++i) REQUIRE(counts[i] == 1);
  for (int i = 10; i < 15; ++i) REQUIRE(counts[i] == 2);
}

TEST_CASE("oversample: (10,4) makes two triples and two doubles") {
  Rng rng(7);
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(1);
  for (int i = 0; i < 4; ++i) labels.push_back(0);
  const auto occ = oversample(labels, rng);
  REQUIRE(occ.size() == 20);
  std::map<std::size_t, int> counts;
  for (auto i : occ) counts[i]++;
  int twos = 0, threes = 0;
  for (int i = 10; i < 14; ++i) {
    if (counts[i] == 2) ++twos;
    if (counts[i] == 3) ++threes;
  }
  REQUIRE(twos == 2);
  REQUIRE(threes == 2);

  // Seeded: same rng seed reproduces the same occurrence list.
  Rng rng_a(7), rng_b(7);
  REQUIRE(oversample(labels, rng_a) == oversample(labels, rng_b));
}

TEST_CASE("oversample rejects single-class splits") {
  Rng rng(2);
  std::vector<int> labels(6, 1);
  REQUIRE_THROWS_AS(oversample(labels, rng), std::invalid_argument);
}

TEST_CASE("sample_windows: eval tiling, single train placement, remainder discard") {
  Rng rng(3);
  const double fs = 10.0;
  Mat raw(1, 600);  // 60 s at 10 Hz
  for (auto& x : raw.v) x = rng.gauss();
  const TrialTensor trial = standardize_trial(raw, fs, 1, "s", "t");

  const auto eval3 = sample_windows(trial, WindowMode::Eval, 20.0, 9, nullptr);
  REQUIRE(eval3.size() == 3);
  for (std::size_t w = 0; w < 3; ++w) REQUIRE(eval3[w].n_samples() == 200);

  Mat raw70(1, 700);
  for (auto& x : raw70.v) x = rng.gauss();
  const TrialTensor t70 = standardize_trial(raw70, fs, 0, "s", "t70");
  REQUIRE(sample_windows(t70, WindowMode::Eval, 20.0, 9, nullptr).size() == 3);

  Mat raw20(1, 200);
  for (auto& x : raw20.v) x = rng.gauss();
  const TrialTensor t20 = standardize_trial(raw20, fs, 0, "s", "t20");
  for (std::uint64_t seed : {1ULL, 9ULL, 77ULL}) {
    Rng r(seed);
    const auto win = sample_windows(t20, WindowMode::Train, 20.0, 2, &r);
    REQUIRE(win.size() == 2);
    for (const auto& w : win)
      for (std::size_t t = 0; t < 200; ++t)
        REQUIRE(w.data(0, t) == Approx(t20.data(0, t)).margin(1e-9));  // only offset 0 exists
  }

  Mat raw_short(1, 150);
  for (auto& x : raw_short.v) x = rng.gauss();
  const TrialTensor tshort = standardize_trial(raw_short, fs, 0, "s", "ts");
  REQUIRE_THROWS_AS(sample_windows(tshort, WindowMode::Train, 20.0, 2, &rng),
                    std::invalid_argument);
}

TEST_CASE("sample_windows re-standardizes each window") {
  Rng rng(4);
  Mat raw(2, 500);
  for (auto& x : raw.v) x = rng.gauss() * 4.0 + 2.0;
  const TrialTensor trial = standardize_trial(raw, 10.0, 1, "s", "t");
  const auto windows = sample_windows(trial, WindowMode::Eval, 10.0, 1, nullptr);
  for (const auto& w : windows) {
    double mean = 0.0;
    for (double x : w.data.v) mean += x;
    mean /= static_cast<double>(w.data.size());
    REQUIRE(std::fabs(mean) < 1e-9);
  }
}

TEST_CASE("train: lr0 = 0 leaves every parameter at its initialization") {
  const auto trials = planted_trials(6, 2, 64, 128.0, 5);
  TrainConfig cfg;
  cfg.feature_kind = FeatureKind::Magnitude;
  cfg.n_maps = 1;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.lr0 = 0.0;
  cfg.seed = 1;
  const TrainResult r = train(cfg, trials);
  const ModelState fresh = init_model(FeatureKind::Magnitude, 2, 1);
  for (std::size_t f = 0; f < fresh.bank.params.size(); ++f) {
    REQUIRE(r.state.bank.params[f].mu == fresh.bank.params[f].mu);
    REQUIRE(r.state.bank.params[f].h == fresh.bank.params[f].h);
    REQUIRE(r.state.bank.params[f].beta_raw == fresh.bank.params[f].beta_raw);
  }
  for (double w : r.state.head.weights) REQUIRE(w == 0.0);
  REQUIRE(r.state.head.bias == 0.0);
}

TEST_CASE("train: identical config and seed give bit-identical results") {
  const auto trials = planted_trials(5, 2, 64, 128.0, 6);
  TrainConfig cfg;
  cfg.feature_kind = FeatureKind::Correlation;
  cfg.n_maps = 1;
  cfg.epochs = 4;
  cfg.batch_size = 8;
  cfg.seed = 99;
  const TrainResult a = train(cfg, trials);
  const TrainResult b = train(cfg, trials);
  REQUIRE(states_equal(a.state, b.state));
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    REQUIRE(a.history[e].mean_loss == b.history[e].mean_loss);
    REQUIRE(a.history[e].train_uar == b.history[e].train_uar);
  }
}

TEST_CASE("train: planted magnitude task reaches train UAR >= 0.95") {
  const auto trials = planted_trials(16, 3, 256, 128.0, 8);
  TrainConfig cfg;
  cfg.feature_kind = FeatureKind::Magnitude;
  cfg.n_maps = 1;
  cfg.epochs = 60;
  cfg.batch_size = 32;
  cfg.lr0 = 2e-3;
  cfg.seed = 3;
  const TrainResult r = train(cfg, trials);
  REQUIRE(r.history.back().train_uar >= 0.95);

  // Loss averaged over 10-epoch windows must not increase.
  const auto& h = r.history;
  double prev = 1e300;
  for (std::size_t start = 0; start + 10 <= h.size(); start += 10) {
    double avg = 0.0;
    for (std::size_t e = start; e < start + 10; ++e) avg += h[e].mean_loss;
    avg /= 10.0;
    REQUIRE(avg <= prev + 1e-9);
    prev = avg;
  }
}

TEST_CASE("train: windowed samples are accepted and batched by window length") {
  const auto trials = planted_trials(4, 2, 300, 10.0, 12);  // 30 s at 10 Hz
  TrainConfig cfg;
  cfg.feature_kind = FeatureKind::Magnitude;
  cfg.n_maps = 1;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.window_s = 10.0;  // 100-sample windows
  cfg.windows_per_epoch = 3;
  cfg.seed = 5;
  const TrainResult r = train(cfg, trials);
  REQUIRE(r.history.size() == 2);
  REQUIRE(r.state.step_counter > 0);
}

TEST_CASE("train rejects single-class and mixed-fs inputs") {
  auto trials = planted_trials(3, 2, 64, 128.0, 13);
  for (auto& t : trials) t.label = 1;
  TrainConfig cfg;
  cfg.feature_kind = FeatureKind::Magnitude;
  cfg.n_maps = 1;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  REQUIRE_THROWS_AS(train(cfg, trials), std::invalid_argument);

  auto mixed = planted_trials(3, 2, 64, 128.0, 14);
  mixed[0].fs = 100.0;
  REQUIRE_THROWS_AS(train(cfg, mixed), std::invalid_argument);
}
