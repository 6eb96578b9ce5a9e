#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "zat/core/rng.hpp"
#include "zat/data/types.hpp"

namespace zat {

namespace detail {

// Groups indices by intent, preserving first-appearance order of intents.
inline std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_intent(
    const std::vector<Utterance>& utts) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    auto [it, inserted] = pos.emplace(utts[i].intent, groups.size());
    if (inserted) groups.push_back({utts[i].intent, {}});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

// Largest-remainder apportionment of n into parts proportional to weights.
inline std::vector<std::size_t> largest_remainder(const std::vector<double>& weights,
                                                  std::size_t n) {
  double total = 0;
  for (double w : weights) total += w;
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = n * weights[i] / total;
    counts[i] = static_cast<std::size_t>(exact);
    assigned += counts[i];
    rem.push_back({exact - counts[i], i});
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; k < n - assigned; ++k) ++counts[rem[k].second];
  return counts;
}

}  // namespace detail

// Intent-stratified train/dev/test split: disjoint and exhaustive, with
// per-stratum counts at the given ratios (largest-remainder rounding).
inline std::array<std::vector<Utterance>, 3> split_dataset(const std::vector<Utterance>& utts,
                                                           std::array<double, 3> ratios,
                                                           Rng rng) {
  check(!utts.empty(), "split_dataset: empty input");
  check(std::fabs(ratios[0] + ratios[1] + ratios[2] - 1.0) < 1e-9,
        "split_dataset: ratios must sum to 1");
  std::array<std::vector<Utterance>, 3> out;
  for (auto& [intent, idx] : detail::group_by_intent(utts)) {
    rng.shuffle(idx);
    auto counts = detail::largest_remainder({ratios[0], ratios[1], ratios[2]}, idx.size());
    std::size_t k = 0;
    for (std::size_t part = 0; part < 3; ++part)
      for (std::size_t c = 0; c < counts[part]; ++c) out[part].push_back(utts[idx[k++]]);
  }
  return out;
}

// Intent-stratified subset of size n. Subsets drawn with the same
// generator state are nested across sizes: each intent's order is fixed
// up front and prefixes are taken.
inline std::vector<Utterance> stratified_sample(const std::vector<Utterance>& utts,
                                                std::size_t n, Rng rng) {
  check(n <= utts.size(), "stratified_sample: n exceeds dataset size");
  auto groups = detail::group_by_intent(utts);
  std::vector<double> weights;
  for (auto& [intent, idx] : groups) {
    rng.shuffle(idx);
    weights.push_back(static_cast<double>(idx.size()));
  }
  auto counts = detail::largest_remainder(weights, n);
  std::vector<Utterance> out;
  out.reserve(n);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t i = 0; i < counts[g]; ++i) out.push_back(utts[groups[g].second[i]]);
  return out;
}

}  // namespace zat
