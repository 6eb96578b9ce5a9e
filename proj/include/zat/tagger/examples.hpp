#pragma once

#include <string>
#include <vector>

#include "zat/tagger/bio.hpp"

namespace zat {

// One per-slot training instance. Holds pointers into caller-owned
// utterance and catalog storage, which must outlive the examples.
struct SlotExample {
  const Utterance* utterance = nullptr;
  const SlotDescription* slot = nullptr;
  TagSequence gold;
  bool positive = false;
};

inline TagSequence gold_tags_for_slot(const Utterance& utt, const std::string& slot_id) {
  std::vector<SlotSpan> spans;
  for (const auto& s : utt.spans)
    if (s.slot_id == slot_id) spans.push_back(s);
  return spans_to_bio(spans, utt.tokens.size());
}

// Per slot: one positive example per utterance containing it, plus up to
// neg_ratio times as many negatives sampled without replacement from the
// utterances lacking it. Deterministic under the generator state.
inline std::vector<SlotExample> build_slot_examples(const std::vector<Utterance>& utterances,
                                                    const std::vector<SlotDescription>& catalog,
                                                    Rng& rng, std::size_t neg_ratio = 3) {
  std::vector<SlotExample> examples;
  for (const auto& slot : catalog) {
    std::vector<const Utterance*> negatives;
    std::size_t positives = 0;
    for (const auto& utt : utterances) {
      if (utt.has_slot(slot.slot_id)) {
        examples.push_back(
            {&utt, &slot, gold_tags_for_slot(utt, slot.slot_id), true});
        ++positives;
      } else {
        negatives.push_back(&utt);
      }
    }
    if (positives == 0) continue;  // slot absent from this data
    rng.shuffle(negatives);
    const std::size_t take = std::min(neg_ratio * positives, negatives.size());
    for (std::size_t i = 0; i < take; ++i)
      examples.push_back({negatives[i], &slot,
                          TagSequence(negatives[i]->tokens.size(), kTagO), false});
  }
  return examples;
}

}  // namespace zat
