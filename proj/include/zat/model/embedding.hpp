#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "zat/core/tape.hpp"
#include "zat/core/tensor.hpp"

namespace zat {

inline constexpr std::size_t kWordDim = 100;

// Word index with UNK and PAD pinned at 0 and 1. Lookup of an unknown
// surface form yields UNK; no lowercasing.
struct Vocabulary {
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kPad = 1;

  std::vector<std::string> words{"<unk>", "<pad>"};
  std::unordered_map<std::string, std::size_t> index;

  std::size_t add(const std::string& w) {
    auto [it, inserted] = index.emplace(w, words.size());
    if (inserted) words.push_back(w);
    return it->second;
  }

  std::size_t lookup(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? kUnk : it->second;
  }

  std::size_t size() const { return words.size(); }
};

struct EmbeddingMatrix {
  Tensor weights;  // [|V|, kWordDim]
  bool trainable = false;
};

// Reads "word v1 ... v100" lines. Row 0 (UNK) is the mean of all loaded
// rows; row 1 (PAD) is zeros.
inline std::pair<Vocabulary, EmbeddingMatrix> load_pretrained(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "load_pretrained: cannot open " + path);
  Vocabulary vocab;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> vec;
    vec.reserve(kWordDim);
    double v;
    while (ls >> v) vec.push_back(v);
    check(vec.size() == kWordDim,
          "load_pretrained: line " + std::to_string(lineno) + " has " +
              std::to_string(vec.size()) + " values, expected " + std::to_string(kWordDim));
    std::size_t idx = vocab.add(word);
    check(idx == rows.size() + 2, "load_pretrained: duplicate word '" + word +
                                      "' at line " + std::to_string(lineno));
    rows.push_back(std::move(vec));
  }
  check(!rows.empty(), "load_pretrained: no vectors in " + path);

  EmbeddingMatrix emb;
  emb.weights = Tensor({rows.size() + 2, kWordDim});
  for (std::size_t j = 0; j < kWordDim; ++j) {
    double mean = 0;
    for (const auto& r : rows) mean += r[j];
    emb.weights.at(Vocabulary::kUnk, j) = mean / static_cast<double>(rows.size());
    emb.weights.at(Vocabulary::kPad, j) = 0.0;
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < kWordDim; ++j) emb.weights.at(i + 2, j) = rows[i][j];
  return {std::move(vocab), std::move(emb)};
}

// Fixed character inventory: UNK, PAD, then printable ASCII 32..126.
inline constexpr std::size_t kCharUnk = 0;
inline constexpr std::size_t kCharPad = 1;
inline constexpr std::size_t kCharVocabSize = 2 + (126 - 32 + 1);

inline std::size_t char_index(unsigned char c) {
  return (c >= 32 && c <= 126) ? 2 + (c - 32) : kCharUnk;
}

struct CharCnnConfig {
  std::size_t char_dim = 16;
  std::size_t filter_width = 3;
  std::size_t channels = 100;
};

// Tape node ids for the char-CNN parameters.
struct CharCnnNodes {
  NodeId char_emb;  // [kCharVocabSize, char_dim]
  NodeId filters;   // [channels, filter_width * char_dim]
  NodeId bias;      // [channels]
};

// Convolution over character embeddings followed by a max-pool across
// positions. Words shorter than the filter width are right-padded with the
// PAD character.
inline NodeId char_cnn_embed(Tape& tape, const std::string& word, const CharCnnNodes& nodes,
                             const CharCnnConfig& cfg) {
  check(!word.empty(), "char_cnn_embed: empty word");
  std::vector<std::size_t> chars;
  for (unsigned char c : word) chars.push_back(char_index(c));
  while (chars.size() < cfg.filter_width) chars.push_back(kCharPad);

  std::vector<NodeId> char_vecs;
  char_vecs.reserve(chars.size());
  for (std::size_t c : chars) char_vecs.push_back(tape.row(nodes.char_emb, c));

  std::vector<NodeId> conv_cols;
  for (std::size_t p = 0; p + cfg.filter_width <= chars.size(); ++p) {
    std::vector<NodeId> window(char_vecs.begin() + p,
                               char_vecs.begin() + p + cfg.filter_width);
    conv_cols.push_back(tape.affine(nodes.filters, tape.concat(window), nodes.bias));
  }
  if (conv_cols.size() == 1) return conv_cols[0];
  return tape.rowmax(tape.concat_cols(conv_cols));
}

// Per-token representation: [char_cnn(token); word_vector(token)], or just
// the word vector on the -CHAR path. The same pipeline serves sentence
// tokens and slot-description words.
inline std::vector<NodeId> embed_tokens(Tape& tape, const std::vector<std::string>& tokens,
                                        const Vocabulary& vocab, NodeId word_emb,
                                        const CharCnnNodes& cnn, const CharCnnConfig& cfg,
                                        bool use_char) {
  check(!tokens.empty(), "embed_tokens: empty token sequence");
  std::vector<NodeId> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    NodeId wv = tape.row(word_emb, vocab.lookup(tok));
    if (use_char)
      out.push_back(tape.concat({char_cnn_embed(tape, tok, cnn, cfg), wv}));
    else
      out.push_back(wv);
  }
  return out;
}

}  // namespace zat
