#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "eegminer/features.hpp"
#include "eegminer/filterbank.hpp"
#include "eegminer/types.hpp"

namespace eegminer {

enum class BnMode { Train, Eval };

// Non-affine batch normalization: standardizes each feature by batch
// statistics (train) or running statistics (eval). No learnable scale/shift,
// so downstream classifier weights remain directly comparable importance
// scores.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
  BnMode mode = BnMode::Train;
};

inline BatchNormState init_batchnorm(std::size_t dim) {
  BatchNormState st;
  st.running_mean.assign(dim, 0.0);
  st.running_var.assign(dim, 1.0);
  return st;
}

// Batch statistics saved by the train-mode forward for the backward pass.
struct BnCache {
  std::vector<double> mean;
  std::vector<double> var;  // population variance
  Mat normalized;
};

// Pure forward; does not touch running statistics. Train mode normalizes by
// the batch's population mean/var, eval mode by the running statistics.
inline Mat batchnorm_apply(const Mat& x, const BatchNormState& st, BnCache* cache = nullptr) {
  const std::size_t B = x.rows;
  const std::size_t D = x.cols;
  if (D != st.running_mean.size())
    throw std::invalid_argument("batchnorm: feature dimension mismatch");
  Mat out(B, D);
  if (st.mode == BnMode::Eval) {
    for (std::size_t d = 0; d < D; ++d) {
      const double inv = 1.0 / std::sqrt(st.running_var[d] + st.eps);
      for (std::size_t i = 0; i < B; ++i) out(i, d) = (x(i, d) - st.running_mean[d]) * inv;
    }
    return out;
  }
  if (B < 2) throw std::invalid_argument("batchnorm: train mode requires batch size >= 2");
  std::vector<double> mean(D, 0.0), var(D, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    double m = 0.0;
    for (std::size_t i = 0; i < B; ++i) m += x(i, d);
    m /= static_cast<double>(B);
    double ss = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      const double c = x(i, d) - m;
      ss += c * c;
    }
    mean[d] = m;
    var[d] = ss / static_cast<double>(B);
    const double inv = 1.0 / std::sqrt(var[d] + st.eps);
    for (std::size_t i = 0; i < B; ++i) out(i, d) = (x(i, d) - m) * inv;
  }
  if (cache) {
    cache->mean = std::move(mean);
    cache->var = std::move(var);
    cache->normalized = out;
  }
  return out;
}

// Exponential running-statistics update from a train-mode forward.
inline void batchnorm_update_running(BatchNormState& st, const BnCache& cache) {
  for (std::size_t d = 0; d < st.running_mean.size(); ++d) {
    st.running_mean[d] = (1.0 - st.momentum) * st.running_mean[d] + st.momentum * cache.mean[d];
    st.running_var[d] = (1.0 - st.momentum) * st.running_var[d] + st.momentum * cache.var[d];
  }
}

// Stateful forward: mutates running statistics in train mode.
inline Mat batchnorm_forward(const Mat& x, BatchNormState& st) {
  BnCache cache;
  Mat out = batchnorm_apply(x, st, st.mode == BnMode::Train ? &cache : nullptr);
  if (st.mode == BnMode::Train) batchnorm_update_running(st, cache);
  return out;
}

// Train-mode Jacobian (mean and variance terms included). Upstream gradients
// sum to zero per dimension on the output, as mean subtraction requires.
inline Mat batchnorm_backward(const Mat& grad_out, const BnCache& cache, double eps) {
  const std::size_t B = grad_out.rows;
  const std::size_t D = grad_out.cols;
  Mat out(B, D);
  const double inv_b = 1.0 / static_cast<double>(B);
  for (std::size_t d = 0; d < D; ++d) {
    const double inv_std = 1.0 / std::sqrt(cache.var[d] + eps);
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      sum_g += grad_out(i, d);
      sum_gx += grad_out(i, d) * cache.normalized(i, d);
    }
    for (std::size_t i = 0; i < B; ++i) {
      out(i, d) = (grad_out(i, d) - sum_g * inv_b - cache.normalized(i, d) * sum_gx * inv_b) *
                  inv_std;
    }
  }
  return out;
}

// Linear classifier with sigmoid activation (logistic regression).
struct ClassifierParams {
  std::vector<double> weights;
  double bias = 0.0;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline std::vector<double> predict(const Mat& features_std, const ClassifierParams& p) {
  if (features_std.cols != p.weights.size())
    throw std::invalid_argument("predict: weight/feature dimension mismatch");
  std::vector<double> probs(features_std.rows);
  for (std::size_t i = 0; i < features_std.rows; ++i) {
    double z = p.bias;
    const double* f = features_std.row(i);
    for (std::size_t d = 0; d < p.weights.size(); ++d) z += p.weights[d] * f[d];
    probs[i] = sigmoid(z);
  }
  return probs;
}

// Mean squared error plus L1 penalty on classifier weights (bias excluded;
// filter parameters are never regularized).
inline double loss_value(const std::vector<double>& preds, const std::vector<double>& targets,
                         const ClassifierParams& p, double gamma) {
  if (preds.size() != targets.size())
    throw std::invalid_argument("loss: prediction/target length mismatch");
  if (preds.empty()) throw std::invalid_argument("loss: empty batch");
  if (gamma < 0.0) throw std::invalid_argument("loss: gamma must be non-negative");
  double mse = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = preds[i] - targets[i];
    mse += e * e;
  }
  mse /= static_cast<double>(preds.size());
  double l1 = 0.0;
  for (double w : p.weights) l1 += std::fabs(w);
  return mse + gamma * l1;
}

// Gradients of the head: loss -> sigmoid -> linear -> batch norm. Returned
// feature gradients are with respect to the raw (pre-normalization) features.
struct HeadBackward {
  double loss = 0.0;
  std::vector<double> probs;
  std::vector<double> d_weights;
  double d_bias = 0.0;
  Mat d_features;  // [B x D]
};

inline HeadBackward head_forward_backward(const Mat& features, BatchNormState& bn,
                                          const ClassifierParams& head,
                                          const std::vector<double>& targets, double gamma,
                                          bool update_running, bool with_backward) {
  const std::size_t B = features.rows;
  const std::size_t D = features.cols;
  if (targets.size() != B)
    throw std::invalid_argument("head_forward_backward: target length mismatch");

  BnCache cache;
  const bool train = bn.mode == BnMode::Train;
  Mat fstd = batchnorm_apply(features, bn, train ? &cache : nullptr);
  if (train && update_running) batchnorm_update_running(bn, cache);

  HeadBackward out;
  out.probs = predict(fstd, head);
  out.loss = loss_value(out.probs, targets, head, gamma);
  if (!with_backward) return out;

  // dL/dz_i = 2 (p_i - t_i) / B * sigma'(z_i)
  std::vector<double> dz(B);
  const double scale = 2.0 / static_cast<double>(B);
  for (std::size_t i = 0; i < B; ++i)
    dz[i] = scale * (out.probs[i] - targets[i]) * out.probs[i] * (1.0 - out.probs[i]);

  out.d_weights.assign(D, 0.0);
  for (std::size_t i = 0; i < B; ++i) {
    const double* f = fstd.row(i);
    for (std::size_t d = 0; d < D; ++d) out.d_weights[d] += dz[i] * f[d];
    out.d_bias += dz[i];
  }
  // L1 subgradient: sign(w), 0 at w = 0.
  for (std::size_t d = 0; d < D; ++d) {
    const double w = head.weights[d];
    if (w > 0.0) out.d_weights[d] += gamma;
    else if (w < 0.0) out.d_weights[d] -= gamma;
  }

  Mat d_fstd(B, D);
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t d = 0; d < D; ++d) d_fstd(i, d) = dz[i] * head.weights[d];

  if (train) {
    out.d_features = batchnorm_backward(d_fstd, cache, bn.eps);
  } else {
    out.d_features = Mat(B, D);
    for (std::size_t d = 0; d < D; ++d) {
      const double inv = 1.0 / std::sqrt(bn.running_var[d] + bn.eps);
      for (std::size_t i = 0; i < B; ++i) out.d_features(i, d) = d_fstd(i, d) * inv;
    }
  }
  return out;
}

// Full trainable state of one model.
struct ModelState {
  FeatureKind kind = FeatureKind::Magnitude;
  FilterBank bank;
  BatchNormState bn;
  ClassifierParams head;

  // Nesterov velocities aligned with the trainables.
  std::vector<double> vel_mu, vel_h, vel_beta;
  std::vector<double> vel_weights;
  double vel_bias = 0.0;
  std::uint64_t step_counter = 0;
};

// Head weights start at zero so initial predictions are exactly 0.5.
inline ModelState init_model(FeatureKind kind, std::size_t n_channels, std::size_t n_maps) {
  ModelState st;
  st.kind = kind;
  st.bank = init_bank(kind, n_channels, n_maps);
  const std::size_t D = feature_dim(kind, n_channels, n_maps);
  st.bn = init_batchnorm(D);
  st.head.weights.assign(D, 0.0);
  st.head.bias = 0.0;
  st.vel_mu.assign(st.bank.n_filters(), 0.0);
  st.vel_h.assign(st.bank.n_filters(), 0.0);
  st.vel_beta.assign(st.bank.n_filters(), 0.0);
  st.vel_weights.assign(D, 0.0);
  return st;
}

inline std::size_t trainable_count(const ModelState& st) {
  return st.bank.n_trainable() + st.head.weights.size() + 1;
}

}  // namespace eegminer
