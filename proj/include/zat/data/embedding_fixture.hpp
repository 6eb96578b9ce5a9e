#pragma once

#include <set>
#include <string>
#include <vector>

#include "zat/core/optim.hpp"
#include "zat/data/generator.hpp"
#include "zat/model/embedding.hpp"

namespace zat {

// A word shaped like a number, a clock time, or a money amount. These are
// deliberately left out of the pretrained fixture so they hit UNK and only
// the character path can tell them apart.
inline bool numeric_like(const std::string& w) {
  for (char c : w)
    if ((c >= '0' && c <= '9') || c == '$') return true;
  return false;
}

// Deterministic stand-in for pretrained vectors: every non-numeric word of
// the built-in grammar (templates, value pools, slot descriptions) gets a
// vector seeded by its own hash, so the fixture never depends on corpus
// size or word order.
inline std::pair<Vocabulary, Tensor> fixture_embeddings(std::size_t word_dim) {
  std::set<std::string> words;
  auto add_tokens = [&](const std::string& text) {
    for (const auto& tok : detail::whitespace_tokens(text))
      if (!numeric_like(tok)) {
        if (tok.size() > 2 && tok.front() == '<' && tok.back() == '>') continue;
        words.insert(tok);
      }
  };
  for (const auto& dom : builtin_domains())
    for (const auto& t : dom.templates) add_tokens(t.pattern);
  for (const auto& [slot, pool] : value_pools())
    for (const auto& v : pool) add_tokens(v);
  for (const auto& [slot, desc] : slot_description_text()) add_tokens(desc);

  Vocabulary vocab;
  Tensor emb({words.size() + 2, word_dim});
  const double a = std::sqrt(3.0 / static_cast<double>(word_dim));
  for (const auto& w : words) {
    const std::size_t row = vocab.add(w);
    Rng rng(fnv1a("embfix:" + w));
    for (std::size_t j = 0; j < word_dim; ++j) emb.at(row, j) = rng.uniform(-a, a);
  }
  // UNK is the mean of the real rows, PAD stays zero
  for (std::size_t j = 0; j < word_dim; ++j) {
    double mean = 0;
    for (std::size_t i = 2; i < emb.shape[0]; ++i) mean += emb.at(i, j);
    emb.at(Vocabulary::kUnk, j) = mean / static_cast<double>(emb.shape[0] - 2);
  }
  return {std::move(vocab), std::move(emb)};
}

// The fixture in the word-vector text format, for tooling that wants a
// file on disk.
inline void write_fixture_embeddings(const std::string& path) {
  auto [vocab, emb] = fixture_embeddings(kWordDim);
  std::ofstream out(path);
  check(out.good(), "write_fixture_embeddings: cannot open " + path);
  char buf[64];
  for (std::size_t i = 2; i < vocab.size(); ++i) {
    out << vocab.words[i];
    for (std::size_t j = 0; j < kWordDim; ++j) {
      std::snprintf(buf, sizeof buf, "%.8g", emb.at(i, j));
      out << " " << buf;
    }
    out << "\n";
  }
}

}  // namespace zat
