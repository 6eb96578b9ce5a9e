#pragma once

#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "zat/data/types.hpp"

namespace zat {

// Exact-match span scoring: a prediction counts only if slot, boundaries,
// and utterance all agree with a gold span.

struct SlotMetrics {
  std::size_t tp = 0, fp = 0, fn = 0;

  double precision() const { return tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0; }
  double recall() const { return tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0; }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
};

struct EvalReport {
  std::map<std::string, SlotMetrics> per_slot;
  SlotMetrics micro;
};

namespace detail {

using SpanKey = std::tuple<std::string, std::string, std::size_t, std::size_t>;

inline SpanKey span_key(const SlotSpan& s) {
  return {s.utterance_id, s.slot_id, s.start, s.end};
}

}  // namespace detail

inline EvalReport span_f1(const std::vector<SlotSpan>& gold,
                          const std::vector<SlotSpan>& pred) {
  std::set<detail::SpanKey> gold_keys, pred_keys;
  for (const auto& s : gold)
    check(gold_keys.insert(detail::span_key(s)).second, "span_f1: duplicate gold span");
  for (const auto& s : pred)
    check(pred_keys.insert(detail::span_key(s)).second, "span_f1: duplicate predicted span");

  EvalReport rep;
  for (const auto& s : pred) {
    SlotMetrics& m = rep.per_slot[s.slot_id];
    if (gold_keys.count(detail::span_key(s)))
      ++m.tp;
    else
      ++m.fp;
  }
  for (const auto& s : gold)
    if (!pred_keys.count(detail::span_key(s))) ++rep.per_slot[s.slot_id].fn;
  for (const auto& [slot, m] : rep.per_slot) {
    rep.micro.tp += m.tp;
    rep.micro.fp += m.fp;
    rep.micro.fn += m.fn;
  }
  return rep;
}

// ---- error breakdowns ----

struct RecallBucket {
  std::size_t matched = 0;
  std::size_t total = 0;
  double recall() const { return total ? static_cast<double>(matched) / total : 0.0; }
};

// Gold-span recall bucketed by start position.
inline std::map<std::size_t, RecallBucket> error_by_position(const std::vector<SlotSpan>& gold,
                                                             const std::vector<SlotSpan>& pred) {
  std::set<detail::SpanKey> pred_keys;
  for (const auto& s : pred) pred_keys.insert(detail::span_key(s));
  std::map<std::size_t, RecallBucket> buckets;
  for (const auto& s : gold) {
    RecallBucket& b = buckets[s.start];
    ++b.total;
    b.matched += pred_keys.count(detail::span_key(s));
  }
  return buckets;
}

// Gold-span recall bucketed by span length in tokens.
inline std::map<std::size_t, RecallBucket> error_by_length(const std::vector<SlotSpan>& gold,
                                                           const std::vector<SlotSpan>& pred) {
  std::set<detail::SpanKey> pred_keys;
  for (const auto& s : pred) pred_keys.insert(detail::span_key(s));
  std::map<std::size_t, RecallBucket> buckets;
  for (const auto& s : gold) {
    RecallBucket& b = buckets[s.end - s.start];
    ++b.total;
    b.matched += pred_keys.count(detail::span_key(s));
  }
  return buckets;
}

struct PosErrorShare {
  std::size_t error_tokens = 0;  // tokens inside FP or FN spans with this tag
  std::size_t total_tokens = 0;  // corpus frequency of this tag
  double share() const {
    return total_tokens ? static_cast<double>(error_tokens) / total_tokens : 0.0;
  }
};

// Token-level error rate per POS tag: how often a token with a given tag
// sits inside a false-positive or false-negative span. Tags rarer than
// min_tag_count are dropped.
inline std::map<std::string, PosErrorShare> error_by_pos_tag(
    const std::vector<SlotSpan>& gold, const std::vector<SlotSpan>& pred,
    const std::vector<Utterance>& utterances, std::size_t min_tag_count = 1) {
  std::map<std::string, const Utterance*> by_id;
  for (const auto& u : utterances) {
    check(u.pos.size() == u.tokens.size(),
          "error_by_pos_tag: utterance " + u.id + " lacks POS tags");
    by_id[u.id] = &u;
  }

  std::map<std::string, PosErrorShare> shares;
  for (const auto& [id, u] : by_id)
    for (const auto& tag : u->pos) ++shares[tag].total_tokens;

  std::set<detail::SpanKey> gold_keys, pred_keys;
  for (const auto& s : gold) gold_keys.insert(detail::span_key(s));
  for (const auto& s : pred) pred_keys.insert(detail::span_key(s));

  // a token may fall in several error spans; count it once per utterance
  std::map<std::string, std::set<std::size_t>> error_positions;
  auto mark = [&](const SlotSpan& s) {
    auto it = by_id.find(s.utterance_id);
    check(it != by_id.end(), "error_by_pos_tag: unknown utterance " + s.utterance_id);
    for (std::size_t t = s.start; t < s.end; ++t) error_positions[s.utterance_id].insert(t);
  };
  for (const auto& s : pred)
    if (!gold_keys.count(detail::span_key(s))) mark(s);
  for (const auto& s : gold)
    if (!pred_keys.count(detail::span_key(s))) mark(s);

  for (const auto& [id, positions] : error_positions)
    for (std::size_t t : positions) ++shares[by_id[id]->pos[t]].error_tokens;

  for (auto it = shares.begin(); it != shares.end();)
    it = it->second.total_tokens < min_tag_count ? shares.erase(it) : std::next(it);
  return shares;
}

// ---- attention inspection ----

// Writes a [T, J] attention matrix as a table: header of description
// words, one row per sentence token, six decimals.
inline void dump_attention(std::ostream& out, const std::vector<std::string>& tokens,
                           const std::vector<std::string>& description, const Tensor& a) {
  check(a.rank() == 2 && a.shape[0] == tokens.size() && a.shape[1] == description.size(),
        "dump_attention: matrix shape does not match token/description counts");
  out << "token";
  for (const auto& w : description) out << "\t" << w;
  out << "\n";
  char buf[32];
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    out << tokens[t];
    double row_sum = 0;
    for (std::size_t j = 0; j < description.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.6f", a.at(t, j));
      out << "\t" << buf;
      row_sum += a.at(t, j);
    }
    check(std::fabs(row_sum - 1.0) < 1e-6, "dump_attention: row does not sum to 1");
    out << "\n";
  }
}

}  // namespace zat
