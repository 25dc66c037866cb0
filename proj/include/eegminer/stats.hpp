#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace eegminer {

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample variance (n - 1 denominator).
inline double sample_var(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double reg_inc_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("reg_inc_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::betacf(a, b, x) / a;
  return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of Student's t with the given degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided_p: df must be positive");
  if (!std::isfinite(t)) return 0.0;
  return reg_inc_beta(0.5 * df, 0.5, df / (df + t * t));
}

// Unweighted average recall: mean over classes of TP_c / (TP_c + FN_c).
// Robust to class imbalance; both classes must appear in the truth.
inline double uar(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("uar: prediction/truth length mismatch");
  std::size_t correct[2] = {0, 0};
  std::size_t total[2] = {0, 0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0 && truth[i] != 1)
      throw std::invalid_argument("uar: labels must be 0 or 1");
    ++total[truth[i]];
    if (predicted[i] == truth[i]) ++correct[truth[i]];
  }
  if (total[0] == 0 || total[1] == 0)
    throw std::invalid_argument("uar: a class is absent from the truth labels");
  const double r0 = static_cast<double>(correct[0]) / static_cast<double>(total[0]);
  const double r1 = static_cast<double>(correct[1]) / static_cast<double>(total[1]);
  return 0.5 * (r0 + r1);
}

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

// Independent two-sample t-test with pooled variance; two-sided p.
inline TTestResult two_sample_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("two_sample_ttest: each group needs at least 2 values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double df = na + nb - 2.0;
  const double pooled = ((na - 1.0) * sample_var(a) + (nb - 1.0) * sample_var(b)) / df;
  if (!(pooled > 0.0))
    throw std::invalid_argument("two_sample_ttest: degenerate (zero pooled variance)");
  TTestResult r;
  r.df = df;
  r.t = (mean_of(a) - mean_of(b)) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  r.p = student_t_two_sided_p(r.t, df);
  return r;
}

}  // namespace eegminer
