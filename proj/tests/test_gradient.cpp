#include <catch2/catch.hpp>

#include <cmath>

#include "eegminer/gradient.hpp"
#include "eegminer/rng.hpp"

using namespace eegminer;

namespace {

std::vector<TrialTensor> make_trials(std::size_t B, std::size_t C, std::size_t N, double fs,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrialTensor> trials;
  for (std::size_t i = 0; i < B; ++i) {
    Mat raw(C, N);
    for (auto& x : raw.v) x = rng.gauss();
    TrialTensor t = standardize_trial(raw, fs, static_cast<int>(i % 2));
    t.trial_id = "t" + std::to_string(i);
    trials.push_back(std::move(t));
  }
  return trials;
}

// A generic (non-initial) model state so no gradient path is trivially zero.
ModelState generic_state(FeatureKind kind, std::size_t C, std::size_t K, std::uint64_t seed) {
  ModelState st = init_model(kind, C, K);
  Rng rng(seed);
  for (auto& p : st.bank.params) {
    p.mu = rng.uniform(8.0, 40.0);
    p.h = rng.uniform(6.0, 30.0);
    p.beta_raw = rng.uniform(2.05, 2.95);
  }
  for (auto& w : st.head.weights) w = rng.gauss() * 0.7;
  st.head.bias = rng.gauss() * 0.2;
  return st;
}

struct FdCheck {
  std::size_t checked = 0;
  double worst_rel = 0.0;
};

// Central finite differences over every trainable scalar.
FdCheck check_all_parameters(FeatureKind kind, double gamma, std::uint64_t seed,
                             double tol, double grad_floor) {
  const std::size_t C = 3, K = 1, N = 64, B = 4;
  const double fs = 128.0;
  const auto trials = make_trials(B, C, N, fs, seed);
  std::vector<PreparedTrial> prepared(B);
  std::vector<const PreparedTrial*> batch(B);
  for (std::size_t i = 0; i < B; ++i) {
    prepared[i] = prepare_trial(trials[i]);
    batch[i] = &prepared[i];
  }

  ModelState st = generic_state(kind, C, K, seed + 1);
  const BackwardResult res = backward_batch(batch, st, gamma, /*update_running=*/false);

  FdCheck out;
  const double step = 1e-4;
  auto compare = [&](double analytic, double* param) {
    const double saved = *param;
    *param = saved + step;
    const double lp = forward_loss(batch, st, gamma);
    *param = saved - step;
    const double lm = forward_loss(batch, st, gamma);
    *param = saved;
    const double fd = (lp - lm) / (2.0 * step);
    if (std::fabs(analytic) <= grad_floor && std::fabs(fd) <= grad_floor) return;
    const double rel = std::fabs(analytic - fd) /
                       std::max({std::fabs(analytic), std::fabs(fd), 1e-12});
    out.worst_rel = std::max(out.worst_rel, rel);
    ++out.checked;
    INFO("kind=" << static_cast<int>(kind) << " analytic=" << analytic << " fd=" << fd);
    REQUIRE(rel < tol);
  };

  for (std::size_t f = 0; f < st.bank.n_filters(); ++f) {
    compare(res.tape.d_mu[f], &st.bank.params[f].mu);
    compare(res.tape.d_h[f], &st.bank.params[f].h);
    compare(res.tape.d_beta_raw[f], &st.bank.params[f].beta_raw);
  }
  for (std::size_t d = 0; d < st.head.weights.size(); ++d)
    compare(res.tape.d_weights[d], &st.head.weights[d]);
  compare(res.tape.d_bias, &st.head.bias);
  return out;
}

}  // namespace

TEST_CASE("end-to-end gradients match finite differences: magnitude") {
  const FdCheck c = check_all_parameters(FeatureKind::Magnitude, 1e-3, 101, 1e-3, 1e-8);
  REQUIRE(c.checked > 0);
}

TEST_CASE("end-to-end gradients match finite differences: correlation") {
  const FdCheck c = check_all_parameters(FeatureKind::Correlation, 1e-3, 202, 1e-3, 1e-8);
  REQUIRE(c.checked > 0);
}

TEST_CASE("end-to-end gradients match finite differences: plv") {
  const FdCheck c = check_all_parameters(FeatureKind::Plv, 1e-3, 303, 1e-3, 1e-8);
  REQUIRE(c.checked > 0);
}

TEST_CASE("zero classifier weights cut all filter gradients") {
  const auto trials = make_trials(4, 3, 64, 128.0, 7);
  ModelState st = init_model(FeatureKind::Correlation, 3, 1);  // weights start at 0
  const BackwardResult res = backward(trials, st, 0.0);
  for (std::size_t f = 0; f < st.bank.n_filters(); ++f) {
    REQUIRE(res.tape.d_mu[f] == 0.0);
    REQUIRE(res.tape.d_h[f] == 0.0);
    REQUIRE(res.tape.d_beta_raw[f] == 0.0);
  }
}

TEST_CASE("duplicated trials receive identical feature gradients") {
  auto trials = make_trials(3, 3, 64, 128.0, 9);
  trials.push_back(trials[0]);  // duplicate of the first
  trials.back().label = trials[0].label;
  ModelState st = generic_state(FeatureKind::Magnitude, 3, 1, 11);
  const BackwardResult res = backward(trials, st, 0.0);
  for (std::size_t d = 0; d < st.head.weights.size(); ++d)
    REQUIRE(res.feature_grads(0, d) == Approx(res.feature_grads(3, d)).margin(1e-15));
}

TEST_CASE("filter gradients are zero for channels with all-zero adjacent weights") {
  const std::size_t C = 4, K = 1;
  const auto trials = make_trials(4, C, 64, 128.0, 13);
  ModelState st = generic_state(FeatureKind::Correlation, C, K, 15);
  // Zero out every weight whose pair touches channel 2.
  const auto entries = feature_index_map(FeatureKind::Correlation, C, K);
  for (const auto& e : entries)
    if (e.channel_a == 2 || e.channel_b == 2) st.head.weights[e.index] = 0.0;
  const BackwardResult res = backward(trials, st, 0.0);
  const std::size_t f = st.bank.filter_index(2, 0);
  REQUIRE(res.tape.d_mu[f] == 0.0);
  REQUIRE(res.tape.d_h[f] == 0.0);
  REQUIRE(res.tape.d_beta_raw[f] == 0.0);
}

TEST_CASE("gradients are deterministic for identical inputs") {
  const auto trials = make_trials(4, 3, 64, 128.0, 17);
  ModelState st1 = generic_state(FeatureKind::Plv, 3, 1, 19);
  ModelState st2 = generic_state(FeatureKind::Plv, 3, 1, 19);
  const BackwardResult a = backward(trials, st1, 2e-3);
  const BackwardResult b = backward(trials, st2, 2e-3);
  REQUIRE(a.loss == b.loss);
  for (std::size_t f = 0; f < st1.bank.n_filters(); ++f) {
    REQUIRE(a.tape.d_mu[f] == b.tape.d_mu[f]);
    REQUIRE(a.tape.d_h[f] == b.tape.d_h[f]);
    REQUIRE(a.tape.d_beta_raw[f] == b.tape.d_beta_raw[f]);
  }
}

TEST_CASE("mixed trial lengths within a batch are rejected") {
  auto trials = make_trials(2, 3, 64, 128.0, 21);
  auto longer = make_trials(2, 3, 128, 128.0, 23);
  trials.insert(trials.end(), longer.begin(), longer.end());
  ModelState st = init_model(FeatureKind::Magnitude, 3, 1);
  REQUIRE_THROWS_AS(backward(trials, st, 0.0), std::invalid_argument);
}

TEST_CASE("non-finite gradients are reported with the parameter name") {
  GradientTape tape;
  tape.d_mu = {0.0, std::numeric_limits<double>::quiet_NaN()};
  tape.d_h = {0.0, 0.0};
  tape.d_beta_raw = {0.0, 0.0};
  tape.d_weights = {0.0};
  REQUIRE_THROWS_WITH(check_tape_finite(tape), Catch::Contains("filter.mu[1]"));
}
