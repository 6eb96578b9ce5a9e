#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "zat/tagger/examples.hpp"

using namespace zat;

TEST_CASE("spans_to_bio encodes disjoint spans") {
  TagSequence tags = spans_to_bio({{"x", 1, 3, ""}, {"x", 4, 5, ""}}, 6);
  REQUIRE(tags == TagSequence{kTagO, kTagB, kTagI, kTagO, kTagB, kTagO});

  REQUIRE(spans_to_bio({}, 3) == TagSequence(3, kTagO));
  REQUIRE_THROWS(spans_to_bio({{"x", 1, 4, ""}}, 3));
  REQUIRE_THROWS(spans_to_bio({{"x", 2, 2, ""}}, 3));
  REQUIRE_THROWS(spans_to_bio({{"x", 0, 2, ""}, {"y", 1, 3, ""}}, 4));
}

TEST_CASE("bio_to_spans inverts spans_to_bio and repairs orphans") {
  std::vector<std::pair<std::size_t, std::size_t>> want{{0, 2}, {3, 4}};
  TagSequence tags = spans_to_bio({{"x", 0, 2, ""}, {"x", 3, 4, ""}}, 5);
  REQUIRE(bio_to_spans(tags) == want);

  // orphan I at start and after O each open a new span
  REQUIRE(bio_to_spans({kTagI, kTagI, kTagO, kTagI}) ==
          std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}, {3, 4}});
  // B after I splits
  REQUIRE(bio_to_spans({kTagB, kTagB, kTagI}) ==
          std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 3}});
  REQUIRE(bio_to_spans({}).empty());
}

TEST_CASE("bio round trip on random tag sequences") {
  Rng rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t T = 1 + rng.uniform_int(12);
    TagSequence tags(T);
    for (auto& t : tags) t = static_cast<int>(rng.uniform_int(3));
    auto spans = bio_to_spans(tags);
    // decoded spans are disjoint, ordered, in bounds
    std::size_t prev_end = 0;
    for (auto [s, e] : spans) {
      REQUIRE(s >= prev_end);
      REQUIRE(s < e);
      REQUIRE(e <= T);
      prev_end = e;
    }
    // re-encoding is a fixed point
    std::vector<SlotSpan> as_spans;
    for (auto [s, e] : spans) as_spans.push_back({"x", s, e, ""});
    REQUIRE(bio_to_spans(spans_to_bio(as_spans, T)) == spans);
  }
}

TEST_CASE("merge_slot_predictions resolves conflicts") {
  std::map<std::string, TagSequence> per_slot{
      {"a", {kTagB, kTagI, kTagO, kTagO, kTagO}},
      {"b", {kTagO, kTagB, kTagI, kTagO, kTagO}},
      {"c", {kTagO, kTagO, kTagO, kTagO, kTagB}},
  };

  SECTION("output spans never overlap") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed);
      auto merged = merge_slot_predictions(per_slot, rng, "u1");
      for (std::size_t i = 0; i < merged.size(); ++i) {
        REQUIRE(merged[i].utterance_id == "u1");
        for (std::size_t j = i + 1; j < merged.size(); ++j)
          REQUIRE(!merged[i].overlaps(merged[j]));
      }
      // the unconflicted span always survives
      bool has_c = false;
      for (const auto& s : merged) has_c |= s.slot_id == "c";
      REQUIRE(has_c);
      REQUIRE(merged.size() == 2);
    }
  }

  SECTION("same seed gives same result") {
    Rng r1(42), r2(42);
    auto m1 = merge_slot_predictions(per_slot, r1);
    auto m2 = merge_slot_predictions(per_slot, r2);
    REQUIRE(m1.size() == m2.size());
    for (std::size_t i = 0; i < m1.size(); ++i) REQUIRE(m1[i] == m2[i]);
  }

  SECTION("both conflicting spans are reachable") {
    std::set<std::string> winners;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      for (const auto& s : merge_slot_predictions(per_slot, rng))
        if (s.slot_id != "c") winners.insert(s.slot_id);
    }
    REQUIRE(winners == std::set<std::string>{"a", "b"});
  }

  SECTION("length mismatch rejected") {
    std::map<std::string, TagSequence> bad{{"a", {kTagO, kTagO}}, {"b", {kTagO}}};
    Rng rng(1);
    REQUIRE_THROWS(merge_slot_predictions(bad, rng));
  }
}

static Utterance make_utt(const std::string& id, std::size_t T,
                          const std::vector<SlotSpan>& spans) {
  Utterance u;
  u.id = id;
  u.domain = "d";
  u.intent = "i";
  for (std::size_t t = 0; t < T; ++t) u.tokens.push_back("tok" + std::to_string(t));
  u.spans = spans;
  for (auto& s : u.spans) s.utterance_id = id;
  u.validate();
  return u;
}

TEST_CASE("gold_tags_for_slot isolates one slot") {
  Utterance u = make_utt("u", 5, {{"a", 0, 2, ""}, {"b", 3, 4, ""}});
  REQUIRE(gold_tags_for_slot(u, "a") == TagSequence{kTagB, kTagI, kTagO, kTagO, kTagO});
  REQUIRE(gold_tags_for_slot(u, "b") == TagSequence{kTagO, kTagO, kTagO, kTagB, kTagO});
  REQUIRE(gold_tags_for_slot(u, "zzz") == TagSequence(5, kTagO));
}

TEST_CASE("build_slot_examples samples negatives at the requested ratio") {
  std::vector<Utterance> utts;
  // 5 utterances with slot a, 20 without
  for (int i = 0; i < 5; ++i)
    utts.push_back(make_utt("p" + std::to_string(i), 4, {{"a", 1, 2, ""}}));
  for (int i = 0; i < 20; ++i) utts.push_back(make_utt("n" + std::to_string(i), 4, {}));
  std::vector<SlotDescription> catalog{{"a", "d", {"slot", "a"}},
                                       {"ghost", "d", {"never", "seen"}}};

  Rng rng(3);
  auto ex = build_slot_examples(utts, catalog, rng, 3);

  std::size_t pos = 0, neg = 0;
  for (const auto& e : ex) {
    REQUIRE(e.slot->slot_id == "a");  // ghost slot has no positives, emits nothing
    REQUIRE(e.gold.size() == e.utterance->tokens.size());
    if (e.positive) {
      ++pos;
      REQUIRE(e.gold == TagSequence{kTagO, kTagB, kTagO, kTagO});
    } else {
      ++neg;
      REQUIRE(e.gold == TagSequence(4, kTagO));
      REQUIRE_FALSE(e.utterance->has_slot("a"));
    }
  }
  REQUIRE(pos == 5);
  REQUIRE(neg == 15);

  SECTION("negatives capped by availability") {
    Rng r2(3);
    auto ex2 = build_slot_examples(utts, catalog, r2, 100);
    std::size_t neg2 = 0;
    for (const auto& e : ex2)
      if (!e.positive) ++neg2;
    REQUIRE(neg2 == 20);
  }

  SECTION("deterministic under seed") {
    Rng ra(9), rb(9);
    auto xa = build_slot_examples(utts, catalog, ra, 3);
    auto xb = build_slot_examples(utts, catalog, rb, 3);
    REQUIRE(xa.size() == xb.size());
    for (std::size_t i = 0; i < xa.size(); ++i) {
      REQUIRE(xa[i].utterance->id == xb[i].utterance->id);
      REQUIRE(xa[i].positive == xb[i].positive);
    }
  }
}
