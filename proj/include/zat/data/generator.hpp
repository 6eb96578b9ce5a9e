#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "zat/core/rng.hpp"
#include "zat/data/split.hpp"
#include "zat/data/types.hpp"

namespace zat {

// ---- built-in multi-domain template grammar ----
// Stands in for a crowdsourced corpus: templates with slot placeholders,
// shared value pools for reusable slots, private pools per domain.

struct DomainTemplate {
  std::string intent;
  std::string pattern;  // whitespace tokens; "<slot>" marks a placeholder
};

struct DomainDef {
  std::string name;
  std::vector<DomainTemplate> templates;
};

inline const std::map<std::string, std::vector<std::string>>& value_pools() {
  static const std::map<std::string, std::vector<std::string>> pools{
      // shared slots
      {"location",
       {"seattle", "portland", "denver", "austin", "boston", "chicago", "miami", "dallas",
        "phoenix", "atlanta"}},
      {"date",
       {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday", "today",
        "tomorrow", "next friday", "june fifth", "march third", "this weekend"}},
      {"time",
       {"noon", "midnight", "5pm", "7am", "9pm", "6:30", "8:15", "morning", "evening"}},
      {"rating",
       {"best", "top", "great", "excellent", "decent", "five star", "highly rated"}},
      {"quantity", {"two", "three", "four", "five", "six", "ten", "7", "12", "a dozen"}},
      {"price", {"cheap", "affordable", "$20", "$45", "$99", "$150", "budget"}},
      {"contact_name",
       {"alice", "bob", "grace", "henry", "maria", "oscar", "priya", "walter"}},
      // private slots
      {"category",
       {"restaurants", "electronics", "spas", "groceries", "flights", "movies", "furniture",
        "toys"}},
      {"item", {"hats", "jackets", "boots", "scarves", "jeans", "dresses", "sneakers", "coats"}},
      {"cuisine", {"mexican", "italian", "thai", "sushi", "vegan", "indian", "korean", "greek"}},
      {"event_type", {"concert", "festival", "workshop", "meetup", "marathon", "gala"}},
      {"product", {"headphones", "laptops", "blenders", "cameras", "books", "chairs"}},
      {"accommodation", {"hotels", "hostels", "cabins", "resorts", "villas", "lodges"}},
      {"place_type", {"work", "airport", "downtown", "gym", "school", "office"}},
      {"property_type", {"houses", "condos", "apartments", "studios", "townhouses"}},
      {"team_name", {"spurs", "lakers", "sounders", "cubs", "hawks", "rockets"}},
      {"media_type", {"photos", "videos", "posts", "stories", "albums"}},
  };
  return pools;
}

inline const std::map<std::string, std::string>& slot_description_text() {
  static const std::map<std::string, std::string> desc{
      {"location", "location city"},
      {"date", "the date"},
      {"time", "time of day"},
      {"rating", "rating value"},
      {"quantity", "number of items"},
      {"price", "price amount"},
      {"contact_name", "contact person name"},
      {"category", "deal category"},
      {"item", "clothing item"},
      {"cuisine", "type of cuisine"},
      {"event_type", "type of event"},
      {"product", "shopping product"},
      {"accommodation", "type of accommodation"},
      {"place_type", "type of place"},
      {"property_type", "type of property"},
      {"team_name", "sports team name"},
      {"media_type", "type of media"},
  };
  return desc;
}

inline const std::vector<DomainDef>& builtin_domains() {
  static const std::vector<DomainDef> domains{
      {"deals",
       {{"find_deal", "find <category> deals in <location>"},
        {"find_deal", "show me <rating> deals for <category>"},
        {"find_deal", "find <rating> <category> deals"},
        {"find_deal", "get me <category> deals for <date>"},
        {"ask_deal", "any <category> deals on <date>"},
        {"ask_deal", "are there deals under <price> in <location>"}}},
      {"fashion",
       {{"browse_fashion", "show me outfits with <item>"},
        {"browse_fashion", "find <rating> <item> for under <price>"},
        {"browse_fashion", "show <item> arriving by <date>"},
        {"order_fashion", "i want <quantity> <item>"},
        {"order_fashion", "order <item> to <location>"}}},
      {"dining",
       {{"book_table", "book a <cuisine> table for <quantity> at <time>"},
        {"book_table", "reserve a table for <quantity> on <date>"},
        {"find_restaurant", "find <rating> <cuisine> restaurants in <location>"},
        {"find_restaurant", "any <cuisine> places open at <time>"}}},
      {"events",
       {{"find_event", "find a <event_type> in <location> on <date>"},
        {"find_event", "buy <quantity> tickets for the <event_type>"},
        {"invite_event", "remind <contact_name> about the <event_type> at <time>"},
        {"invite_event", "invite <contact_name> to the <event_type> on <date>"}}},
      {"shopping",
       {{"order_product", "order <quantity> <product> for under <price>"},
        {"order_product", "buy <product> for <price>"},
        {"find_product", "find <rating> <product>"},
        {"find_product", "ship <product> to <location> by <date>"}}},
      {"travel",
       {{"find_stay", "find <accommodation> in <location> for <date>"},
        {"find_stay", "book <quantity> nights at a <rating> <accommodation>"},
        {"find_stay", "find <accommodation> under <price> near <location>"},
        {"book_flight", "i need a flight to <location> at <time>"}}},
      {"transportation",
       {{"traffic_info", "what is the traffic like to <place_type>"},
        {"traffic_info", "how long to drive to <place_type> by <time>"},
        {"request_ride", "get me a ride to <location> at <time>"},
        {"request_ride", "call a cab for <quantity> people to <location>"}}},
      {"real_estate",
       {{"find_listing", "show <property_type> for rent in <location>"},
        {"find_listing", "find <property_type> under <price>"},
        {"find_listing", "list <rating> <property_type> available from <date>"}}},
      {"sports",
       {{"team_schedule", "find <team_name> game schedule"},
        {"team_schedule", "when do the <team_name> play on <date>"},
        {"buy_tickets", "buy <quantity> tickets for the <team_name> game at <time>"}}},
      {"social",
       {{"view_media", "show me the <media_type> from <contact_name>"},
        {"share_media", "send my <media_type> to <contact_name>"},
        {"share_media", "post <quantity> <media_type> from <date>"}}},
  };
  return domains;
}

// Coarse POS lexicon covering every template and pool token.
inline std::string pos_of(const std::string& tok) {
  static const std::map<std::string, std::string> lex{
      // verbs
      {"find", "VERB"}, {"show", "VERB"}, {"get", "VERB"}, {"book", "VERB"},
      {"reserve", "VERB"}, {"buy", "VERB"}, {"order", "VERB"}, {"ship", "VERB"},
      {"send", "VERB"}, {"post", "VERB"}, {"want", "VERB"}, {"invite", "VERB"},
      {"remind", "VERB"}, {"call", "VERB"}, {"play", "VERB"}, {"drive", "VERB"},
      {"list", "VERB"}, {"arriving", "VERB"}, {"need", "VERB"}, {"rent", "VERB"},
      // adjectives / adverbs
      {"best", "ADJ"}, {"top", "ADJ"}, {"great", "ADJ"}, {"excellent", "ADJ"},
      {"decent", "ADJ"}, {"cheap", "ADJ"}, {"affordable", "ADJ"}, {"budget", "ADJ"},
      {"rated", "ADJ"}, {"open", "ADJ"}, {"available", "ADJ"}, {"fifth", "ADJ"},
      {"third", "ADJ"}, {"next", "ADJ"}, {"highly", "ADV"}, {"long", "ADV"},
      // numerals
      {"two", "NUM"}, {"three", "NUM"}, {"four", "NUM"}, {"five", "NUM"},
      {"six", "NUM"}, {"ten", "NUM"}, {"7", "NUM"}, {"12", "NUM"}, {"dozen", "NUM"},
      {"5pm", "NUM"}, {"7am", "NUM"}, {"9pm", "NUM"}, {"6:30", "NUM"}, {"8:15", "NUM"},
      {"$20", "NUM"}, {"$45", "NUM"}, {"$99", "NUM"}, {"$150", "NUM"},
      // proper nouns
      {"seattle", "PROPN"}, {"portland", "PROPN"}, {"denver", "PROPN"},
      {"austin", "PROPN"}, {"boston", "PROPN"}, {"chicago", "PROPN"},
      {"miami", "PROPN"}, {"dallas", "PROPN"}, {"phoenix", "PROPN"},
      {"atlanta", "PROPN"}, {"monday", "PROPN"}, {"tuesday", "PROPN"},
      {"wednesday", "PROPN"}, {"thursday", "PROPN"}, {"friday", "PROPN"},
      {"saturday", "PROPN"}, {"sunday", "PROPN"}, {"june", "PROPN"},
      {"march", "PROPN"}, {"alice", "PROPN"}, {"bob", "PROPN"}, {"grace", "PROPN"},
      {"henry", "PROPN"}, {"maria", "PROPN"}, {"oscar", "PROPN"}, {"priya", "PROPN"},
      {"walter", "PROPN"}, {"spurs", "PROPN"}, {"lakers", "PROPN"},
      {"sounders", "PROPN"}, {"cubs", "PROPN"}, {"hawks", "PROPN"}, {"rockets", "PROPN"},
      // function words and misc
      {"in", "OTHER"}, {"for", "OTHER"}, {"me", "OTHER"}, {"a", "OTHER"},
      {"the", "OTHER"}, {"any", "OTHER"}, {"on", "OTHER"}, {"at", "OTHER"},
      {"under", "OTHER"}, {"to", "OTHER"}, {"with", "OTHER"}, {"i", "OTHER"},
      {"by", "OTHER"}, {"near", "OTHER"}, {"what", "OTHER"}, {"is", "OTHER"},
      {"like", "OTHER"}, {"how", "OTHER"}, {"are", "OTHER"}, {"there", "OTHER"},
      {"when", "OTHER"}, {"do", "OTHER"}, {"my", "OTHER"}, {"from", "OTHER"},
      {"this", "OTHER"}, {"about", "OTHER"},
  };
  auto it = lex.find(tok);
  return it != lex.end() ? it->second : "NOUN";
}

struct GeneratorSpec {
  std::uint64_t seed = 1;
  std::size_t utterances_per_domain = 1000;
  std::vector<std::string> domains;  // empty selects every built-in domain
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
  std::size_t min_positives = 20;
};

namespace detail {

inline std::vector<std::string> whitespace_tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

inline Utterance instantiate(const DomainDef& dom, const DomainTemplate& tmpl,
                             const std::string& id, Rng& rng) {
  Utterance u;
  u.id = id;
  u.domain = dom.name;
  u.intent = tmpl.intent;
  for (const auto& tok : whitespace_tokens(tmpl.pattern)) {
    if (tok.size() > 2 && tok.front() == '<' && tok.back() == '>') {
      const std::string slot = tok.substr(1, tok.size() - 2);
      auto pool = value_pools().find(slot);
      check(pool != value_pools().end(),
            "generate_corpus: template references unknown slot " + slot);
      const std::string& value = pool->second[rng.uniform_int(pool->second.size())];
      const std::size_t start = u.tokens.size();
      for (const auto& vt : whitespace_tokens(value)) {
        u.tokens.push_back(vt);
        u.pos.push_back(pos_of(vt));
      }
      u.spans.push_back({slot, start, u.tokens.size(), u.id});
    } else {
      u.tokens.push_back(tok);
      u.pos.push_back(pos_of(tok));
    }
  }
  u.validate();
  check(u.tokens.size() >= 3 && u.tokens.size() <= 15,
        "generate_corpus: template yields out-of-range length: " + tmpl.pattern);
  return u;
}

inline std::vector<std::string> domain_slots(const DomainDef& dom) {
  std::vector<std::string> slots;
  std::set<std::string> seen;
  for (const auto& t : dom.templates)
    for (const auto& tok : whitespace_tokens(t.pattern))
      if (tok.size() > 2 && tok.front() == '<' && tok.back() == '>') {
        const std::string slot = tok.substr(1, tok.size() - 2);
        if (seen.insert(slot).second) slots.push_back(slot);
      }
  return slots;
}

}  // namespace detail

inline std::vector<SlotDescription> catalog_for_domain(const DomainDef& dom) {
  std::vector<SlotDescription> catalog;
  for (const auto& slot : detail::domain_slots(dom)) {
    auto it = slot_description_text().find(slot);
    check(it != slot_description_text().end(),
          "generate_corpus: no description for slot " + slot);
    catalog.push_back({slot, dom.name, detail::whitespace_tokens(it->second)});
  }
  return catalog;
}

// Deterministic synthetic corpus. Each selected domain gets
// `utterances_per_domain` template instantiations, then an intent-
// stratified 80/10/10 split.
inline std::vector<DomainDataset> generate_corpus(const GeneratorSpec& spec) {
  std::vector<const DomainDef*> selected;
  if (spec.domains.empty()) {
    for (const auto& d : builtin_domains()) selected.push_back(&d);
  } else {
    for (const auto& name : spec.domains) {
      const DomainDef* found = nullptr;
      for (const auto& d : builtin_domains())
        if (d.name == name) found = &d;
      check(found != nullptr, "generate_corpus: unknown domain " + name);
      selected.push_back(found);
    }
  }

  // transfer requires at least two slots shared by two or more domains
  std::map<std::string, std::size_t> slot_domains;
  for (const auto* d : selected)
    for (const auto& s : detail::domain_slots(*d)) ++slot_domains[s];
  std::size_t shared = 0;
  for (const auto& [slot, cnt] : slot_domains)
    if (cnt >= 2) ++shared;
  check(selected.size() < 2 || shared >= 2,
        "generate_corpus: selected domains share fewer than 2 slots");

  std::vector<DomainDataset> out;
  for (const auto* dom : selected) {
    Rng rng(spec.seed ^ fnv1a("domain:" + dom->name));
    std::vector<Utterance> utts;
    utts.reserve(spec.utterances_per_domain);
    for (std::size_t i = 0; i < spec.utterances_per_domain; ++i) {
      char id[64];
      std::snprintf(id, sizeof id, "%s-%06zu", dom->name.c_str(), i);
      const DomainTemplate& tmpl = dom->templates[rng.uniform_int(dom->templates.size())];
      utts.push_back(detail::instantiate(*dom, tmpl, id, rng));
    }

    DomainDataset ds;
    ds.domain = dom->name;
    ds.catalog = catalog_for_domain(*dom);
    for (const auto& slot : ds.catalog) {
      std::size_t positives = 0;
      for (const auto& u : utts)
        if (u.has_slot(slot.slot_id)) ++positives;
      check(positives >= spec.min_positives,
            "generate_corpus: slot " + slot.slot_id + " in domain " + dom->name + " has only " +
                std::to_string(positives) + " positive utterances");
    }

    auto splits = split_dataset(utts, spec.split_ratios, Rng(spec.seed ^ fnv1a("split:" + dom->name)));
    ds.train = std::move(splits[0]);
    ds.dev = std::move(splits[1]);
    ds.test = std::move(splits[2]);
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace zat
