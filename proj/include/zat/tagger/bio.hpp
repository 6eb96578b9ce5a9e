#pragma once

#include <map>
#include <string>
#include <vector>

#include "zat/core/rng.hpp"
#include "zat/data/types.hpp"
#include "zat/model/crf.hpp"

namespace zat {

// Spans (for one slot) to a {B, I, O} sequence. Spans must be disjoint and
// in bounds.
inline TagSequence spans_to_bio(const std::vector<SlotSpan>& spans, std::size_t T) {
  TagSequence tags(T, kTagO);
  for (const auto& s : spans) {
    check(s.start < s.end && s.end <= T, "spans_to_bio: span out of bounds");
    for (std::size_t t = s.start; t < s.end; ++t) {
      check(tags[t] == kTagO, "spans_to_bio: overlapping spans");
      tags[t] = t == s.start ? kTagB : kTagI;
    }
  }
  return tags;
}

// Maximal B(I)* runs become spans. An orphan I (at the start or after O)
// is repaired to B, CoNLL-style.
inline std::vector<std::pair<std::size_t, std::size_t>> bio_to_spans(const TagSequence& tags) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] == kTagO) continue;
    if (tags[t] == kTagB || spans.empty() || spans.back().second != t)
      spans.emplace_back(t, t + 1);
    else
      spans.back().second = t + 1;
  }
  return spans;
}

// Merges per-slot predictions into one non-overlapping span set. Spans of
// different slots that overlap form conflict components; one span per
// component survives, drawn uniformly. Candidates are canonically sorted
// first, so the outcome does not depend on map iteration order.
inline std::vector<SlotSpan> merge_slot_predictions(
    const std::map<std::string, TagSequence>& per_slot, Rng& rng,
    const std::string& utterance_id = "") {
  std::size_t T = 0;
  std::vector<SlotSpan> all;
  for (const auto& [slot, tags] : per_slot) {
    if (T == 0) T = tags.size();
    check(tags.size() == T, "merge_slot_predictions: sequence lengths differ");
    for (auto [s, e] : bio_to_spans(tags)) all.push_back({slot, s, e, utterance_id});
  }
  std::sort(all.begin(), all.end(), [](const SlotSpan& a, const SlotSpan& b) {
    return std::tie(a.start, a.end, a.slot_id) < std::tie(b.start, b.end, b.slot_id);
  });

  std::vector<SlotSpan> out;
  std::size_t i = 0;
  while (i < all.size()) {
    // overlap-connected component: intervals chained while they intersect
    std::size_t j = i + 1, max_end = all[i].end;
    while (j < all.size() && all[j].start < max_end) {
      max_end = std::max(max_end, all[j].end);
      ++j;
    }
    if (j == i + 1)
      out.push_back(all[i]);
    else
      out.push_back(all[i + rng.uniform_int(j - i)]);
    i = j;
  }
  return out;
}

}  // namespace zat
