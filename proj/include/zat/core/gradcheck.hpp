#pragma once

#include <cmath>
#include <functional>
#include <numeric>

#include "zat/core/params.hpp"
#include "zat/core/rng.hpp"

namespace zat {

// A differentiable scalar loss: returns the loss for `params` and, when
// `grads_out` is non-null, fills it with the analytic gradients.
using LossFn = std::function<double(const ParamSet& params, ParamSet* grads_out)>;

// Compares analytic gradients against central finite differences on a
// random coordinate subset (at least 50 per tensor, or all when smaller).
// Returns the maximum relative error seen.
inline double grad_check(const LossFn& f, ParamSet params, double eps = 1e-5,
                         std::uint64_t seed = 1234) {
  ParamSet analytic;
  for (const auto& n : params.names()) analytic.add(n, Tensor(params[n].shape));
  const double base = f(params, &analytic);
  check(std::isfinite(base), "grad_check: non-finite loss");

  Rng rng(seed);
  double max_rel = 0.0;
  for (const auto& name : params.names()) {
    Tensor& p = params[name];
    std::vector<std::size_t> coords(p.numel());
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > 50) {
      rng.shuffle(coords);
      coords.resize(50);
    }
    for (std::size_t i : coords) {
      if (std::isinf(p.data[i])) continue;  // hard-masked entries
      const double orig = p.data[i];
      p.data[i] = orig + eps;
      const double up = f(params, nullptr);
      p.data[i] = orig - eps;
      const double down = f(params, nullptr);
      p.data[i] = orig;
      check(std::isfinite(up) && std::isfinite(down), "grad_check: non-finite loss");
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic[name].data[i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
      max_rel = std::max(max_rel, std::fabs(a - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace zat
