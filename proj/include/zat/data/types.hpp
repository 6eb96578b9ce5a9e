#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "zat/core/tensor.hpp"

namespace zat {

// Half-open token range [start, end) labeled with a slot.
struct SlotSpan {
  std::string slot_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string utterance_id;

  bool overlaps(const SlotSpan& o) const { return start < o.end && o.start < end; }
  friend bool operator==(const SlotSpan&, const SlotSpan&) = default;
};

// The zero-shot label representation: a slot plus its natural-language
// description words.
struct SlotDescription {
  std::string slot_id;
  std::string domain;
  std::vector<std::string> description;
};

// Coarse POS inventory emitted by the corpus generator.
inline const std::vector<std::string>& pos_inventory() {
  static const std::vector<std::string> tags{"NOUN", "VERB", "ADJ",   "ADV",
                                             "NUM",  "PROPN", "OTHER"};
  return tags;
}

struct Utterance {
  std::string id;
  std::string domain;
  std::string intent;
  std::vector<std::string> tokens;
  std::vector<SlotSpan> spans;
  std::vector<std::string> pos;  // empty or aligned with tokens

  bool has_slot(const std::string& slot_id) const {
    return std::any_of(spans.begin(), spans.end(),
                       [&](const SlotSpan& s) { return s.slot_id == slot_id; });
  }

  void validate() const {
    check(!tokens.empty(), "Utterance " + id + ": no tokens");
    check(pos.empty() || pos.size() == tokens.size(),
          "Utterance " + id + ": POS column length mismatch");
    for (const auto& s : spans)
      check(s.start < s.end && s.end <= tokens.size(),
            "Utterance " + id + ": span out of bounds for slot " + s.slot_id);
    for (std::size_t i = 0; i < spans.size(); ++i)
      for (std::size_t j = i + 1; j < spans.size(); ++j)
        check(!spans[i].overlaps(spans[j]),
              "Utterance " + id + ": overlapping gold spans");
  }
};

struct DomainDataset {
  std::string domain;
  std::vector<SlotDescription> catalog;
  std::vector<Utterance> train, dev, test;

  const SlotDescription* find_slot(const std::string& slot_id) const {
    for (const auto& s : catalog)
      if (s.slot_id == slot_id) return &s;
    return nullptr;
  }
};

}  // namespace zat
