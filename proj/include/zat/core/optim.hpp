#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "zat/core/params.hpp"
#include "zat/core/rng.hpp"
#include "zat/core/tensor.hpp"

namespace zat {

// Xavier/Glorot uniform: U[-a, a] with a = sqrt(6 / (fan_in + fan_out)).
// For matrices [out, in]: fan_out = shape[0], fan_in = shape[1]; vectors
// use their length for both.
inline Tensor xavier_uniform_init(const std::vector<std::size_t>& shape, Rng& rng) {
  check(!shape.empty(), "xavier_uniform_init: empty shape");
  for (std::size_t d : shape) check(d > 0, "xavier_uniform_init: zero dimension");
  double fan_out = static_cast<double>(shape[0]);
  double fan_in = shape.size() >= 2 ? static_cast<double>(shape[1]) : fan_out;
  if (shape.size() > 2)
    for (std::size_t i = 2; i < shape.size(); ++i) fan_in *= static_cast<double>(shape[i]);
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor t(shape);
  for (double& v : t.data) v = rng.uniform(-a, a);
  return t;
}

// Scales all gradients by max_norm / ||g||_2 when the global norm exceeds
// max_norm. Idempotent.
inline void clip_global_norm(ParamSet& grads, double max_norm) {
  check(max_norm > 0, "clip_global_norm: max_norm must be positive");
  double sq = 0;
  for (const auto& n : grads.names()) sq += l2_norm_sq(grads[n]);
  const double norm = std::sqrt(sq);
  // The slack makes clipping exactly idempotent despite rounding in the
  // rescale itself.
  if (norm <= max_norm * (1.0 + 1e-12)) return;
  const double s = max_norm / norm;
  for (const auto& n : grads.names())
    for (double& v : grads[n].data) v *= s;
}

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::unordered_map<std::string, Tensor> m, v;
};

// One bias-corrected Adam update over the named subset `trainable` (all
// names of `grads` when empty).
inline void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state,
                      const std::vector<std::string>& trainable = {}) {
  const std::vector<std::string>& names = trainable.empty() ? grads.names() : trainable;
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, state.t);
  const double bc2 = 1.0 - std::pow(state.beta2, state.t);
  for (const auto& name : names) {
    Tensor& p = params[name];
    const Tensor& g = grads[name];
    check(p.same_shape(g), "adam_step: shape mismatch for " + name);
    Tensor& m = state.m.try_emplace(name, Tensor(p.shape)).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor(p.shape)).first->second;
    for (std::size_t i = 0; i < p.numel(); ++i) {
      m.data[i] = state.beta1 * m.data[i] + (1 - state.beta1) * g.data[i];
      v.data[i] = state.beta2 * v.data[i] + (1 - state.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace zat
