#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "zat/data/types.hpp"

namespace zat {

// ---- line-oriented corpus records ----
// {"id":..., "domain":..., "intent":..., "tokens":[...],
//  "spans":[["slot",start,end],...], "pos":[...]}   (pos optional)

inline nlohmann::json utterance_to_json(const Utterance& u) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& s : u.spans) spans.push_back({s.slot_id, s.start, s.end});
  nlohmann::json j{{"id", u.id},
                   {"domain", u.domain},
                   {"intent", u.intent},
                   {"tokens", u.tokens},
                   {"spans", spans}};
  if (!u.pos.empty()) j["pos"] = u.pos;
  return j;
}

inline Utterance utterance_from_json(const nlohmann::json& j) {
  Utterance u;
  u.id = j.at("id").get<std::string>();
  u.domain = j.at("domain").get<std::string>();
  u.intent = j.at("intent").get<std::string>();
  u.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& s : j.at("spans")) {
    check(s.is_array() && s.size() == 3, "utterance " + u.id + ": malformed span");
    u.spans.push_back({s[0].get<std::string>(), s[1].get<std::size_t>(),
                       s[2].get<std::size_t>(), u.id});
  }
  if (j.contains("pos")) u.pos = j.at("pos").get<std::vector<std::string>>();
  u.validate();
  return u;
}

inline void save_utterances(const std::vector<Utterance>& utts, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "save_utterances: cannot open " + path);
  for (const auto& u : utts) out << utterance_to_json(u).dump() << "\n";
  check(out.good(), "save_utterances: write failed for " + path);
}

inline std::vector<Utterance> load_utterances(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "load_utterances: cannot open " + path);
  std::vector<Utterance> utts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      utts.push_back(utterance_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("load_utterances: record " + std::to_string(lineno) + " of " +
                               path + ": " + e.what());
    }
  }
  return utts;
}

// ---- slot catalog: {"slot":..., "domain":..., "description":"words ..."} ----

inline void save_catalog(const std::vector<SlotDescription>& catalog, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "save_catalog: cannot open " + path);
  for (const auto& s : catalog) {
    std::string desc;
    for (std::size_t i = 0; i < s.description.size(); ++i)
      desc += (i ? " " : "") + s.description[i];
    out << nlohmann::json{{"slot", s.slot_id}, {"domain", s.domain}, {"description", desc}}.dump()
        << "\n";
  }
}

inline std::vector<SlotDescription> load_catalog(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "load_catalog: cannot open " + path);
  std::vector<SlotDescription> catalog;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    SlotDescription s;
    s.slot_id = j.at("slot").get<std::string>();
    s.domain = j.value("domain", "");
    std::istringstream ds(j.at("description").get<std::string>());
    std::string w;
    while (ds >> w) s.description.push_back(w);
    check(!s.description.empty(),
          "load_catalog: empty description at record " + std::to_string(lineno));
    catalog.push_back(std::move(s));
  }
  return catalog;
}

// ---- whole-domain save/load: <dir>/<domain>.{catalog,train,dev,test}.jsonl ----

inline void save_domain(const DomainDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string base = dir + "/" + ds.domain;
  save_catalog(ds.catalog, base + ".catalog.jsonl");
  save_utterances(ds.train, base + ".train.jsonl");
  save_utterances(ds.dev, base + ".dev.jsonl");
  save_utterances(ds.test, base + ".test.jsonl");
}

inline DomainDataset load_domain(const std::string& dir, const std::string& domain) {
  DomainDataset ds;
  ds.domain = domain;
  const std::string base = dir + "/" + domain;
  ds.catalog = load_catalog(base + ".catalog.jsonl");
  ds.train = load_utterances(base + ".train.jsonl");
  ds.dev = load_utterances(base + ".dev.jsonl");
  ds.test = load_utterances(base + ".test.jsonl");
  for (const auto* split : {&ds.train, &ds.dev, &ds.test})
    for (const auto& u : *split)
      for (const auto& s : u.spans)
        check(ds.find_slot(s.slot_id) != nullptr,
              "load_domain: utterance " + u.id + " references unknown slot " + s.slot_id);
  return ds;
}

}  // namespace zat
