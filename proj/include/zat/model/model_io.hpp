#pragma once

#include <string>

#include <json.hpp>

#include "zat/core/checkpoint.hpp"
#include "zat/model/baselines.hpp"
#include "zat/model/zat.hpp"

namespace zat {

// Model checkpoints: tensors in the hex-float container, architecture and
// vocabulary in the single-line JSON meta field.

namespace detail {

inline nlohmann::json vocab_to_json(const Vocabulary& vocab) {
  nlohmann::json words = nlohmann::json::array();
  for (std::size_t i = 2; i < vocab.words.size(); ++i) words.push_back(vocab.words[i]);
  return words;
}

inline Vocabulary vocab_from_json(const nlohmann::json& words) {
  Vocabulary vocab;
  for (const auto& w : words) vocab.add(w.get<std::string>());
  return vocab;
}

inline nlohmann::json load_meta(const std::string& path, const std::string& want_kind,
                                ParamSet* params) {
  std::string meta;
  *params = load_checkpoint(path, &meta);
  nlohmann::json j = nlohmann::json::parse(meta);
  check(j.at("kind").get<std::string>() == want_kind,
        "model checkpoint " + path + " holds a '" + j.at("kind").get<std::string>() +
            "' model, expected '" + want_kind + "'");
  return j;
}

}  // namespace detail

inline std::string checkpoint_kind(const std::string& path) {
  std::string meta;
  load_checkpoint(path, &meta);
  return nlohmann::json::parse(meta).at("kind").get<std::string>();
}

// ---- ZAT ----

inline void save_model(const ZatModel& m, const std::string& path) {
  nlohmann::json j{{"kind", "zat"},
                   {"config",
                    {{"word_dim", m.cfg.word_dim},
                     {"char_dim", m.cfg.cnn.char_dim},
                     {"filter_width", m.cfg.cnn.filter_width},
                     {"channels", m.cfg.cnn.channels},
                     {"ctx_hidden", m.cfg.ctx_hidden},
                     {"cond_hidden", m.cfg.cond_hidden},
                     {"ff_hidden", m.cfg.ff_hidden},
                     {"use_crf", m.cfg.use_crf},
                     {"use_char", m.cfg.use_char},
                     {"weft", m.cfg.weft},
                     {"structural_mask", m.cfg.structural_mask},
                     {"dropout_keep", m.cfg.dropout_keep}}},
                   {"vocab", detail::vocab_to_json(m.vocab)}};
  save_checkpoint(m.params, j.dump(), path);
}

inline ZatModel load_zat(const std::string& path) {
  ZatModel m;
  nlohmann::json j = detail::load_meta(path, "zat", &m.params);
  const auto& c = j.at("config");
  m.cfg.word_dim = c.at("word_dim").get<std::size_t>();
  m.cfg.cnn = {c.at("char_dim").get<std::size_t>(), c.at("filter_width").get<std::size_t>(),
               c.at("channels").get<std::size_t>()};
  m.cfg.ctx_hidden = c.at("ctx_hidden").get<std::size_t>();
  m.cfg.cond_hidden = c.at("cond_hidden").get<std::size_t>();
  m.cfg.ff_hidden = c.at("ff_hidden").get<std::size_t>();
  m.cfg.use_crf = c.at("use_crf").get<bool>();
  m.cfg.use_char = c.at("use_char").get<bool>();
  m.cfg.weft = c.at("weft").get<bool>();
  m.cfg.structural_mask = c.at("structural_mask").get<bool>();
  m.cfg.dropout_keep = c.at("dropout_keep").get<double>();
  m.vocab = detail::vocab_from_json(j.at("vocab"));
  check(m.params["word_emb"].shape[0] == m.vocab.size(),
        "load_zat: vocabulary and embedding matrix disagree in " + path);
  return m;
}

// ---- concept tagger ----

inline void save_model(const CtModel& m, const std::string& path) {
  nlohmann::json j{{"kind", "ct"},
                   {"config",
                    {{"word_dim", m.cfg.word_dim},
                     {"hidden1", m.cfg.hidden1},
                     {"combined", m.cfg.combined},
                     {"hidden2", m.cfg.hidden2}}},
                   {"vocab", detail::vocab_to_json(m.vocab)}};
  save_checkpoint(m.params, j.dump(), path);
}

inline CtModel load_ct(const std::string& path) {
  CtModel m;
  nlohmann::json j = detail::load_meta(path, "ct", &m.params);
  const auto& c = j.at("config");
  m.cfg.word_dim = c.at("word_dim").get<std::size_t>();
  m.cfg.hidden1 = c.at("hidden1").get<std::size_t>();
  m.cfg.combined = c.at("combined").get<std::size_t>();
  m.cfg.hidden2 = c.at("hidden2").get<std::size_t>();
  m.vocab = detail::vocab_from_json(j.at("vocab"));
  check(m.params["word_emb"].shape[0] == m.vocab.size(),
        "load_ct: vocabulary and embedding matrix disagree in " + path);
  return m;
}

// ---- closed-tagset LSTM baseline ----

inline void save_model(const LstmTagger& m, const std::string& path) {
  nlohmann::json j{{"kind", "lstm"},
                   {"config",
                    {{"word_dim", m.cfg.word_dim},
                     {"char_dim", m.cfg.char_dim},
                     {"char_hidden", m.cfg.char_hidden},
                     {"word_hidden", m.cfg.word_hidden},
                     {"dropout_keep", m.cfg.dropout_keep}}},
                   {"slots", m.slots},
                   {"vocab", detail::vocab_to_json(m.vocab)}};
  save_checkpoint(m.params, j.dump(), path);
}

inline LstmTagger load_lstm_tagger(const std::string& path) {
  LstmTagger m;
  nlohmann::json j = detail::load_meta(path, "lstm", &m.params);
  const auto& c = j.at("config");
  m.cfg.word_dim = c.at("word_dim").get<std::size_t>();
  m.cfg.char_dim = c.at("char_dim").get<std::size_t>();
  m.cfg.char_hidden = c.at("char_hidden").get<std::size_t>();
  m.cfg.word_hidden = c.at("word_hidden").get<std::size_t>();
  m.cfg.dropout_keep = c.at("dropout_keep").get<double>();
  m.slots = j.at("slots").get<std::vector<std::string>>();
  m.vocab = detail::vocab_from_json(j.at("vocab"));
  check(m.params["out.w"].shape[0] == m.num_tags(),
        "load_lstm_tagger: tagset and output layer disagree in " + path);
  return m;
}

}  // namespace zat
