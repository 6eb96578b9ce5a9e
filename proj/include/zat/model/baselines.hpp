#pragma once

#include <map>
#include <string>
#include <vector>

#include "zat/model/zat.hpp"
#include "zat/tagger/bio.hpp"

namespace zat {

// ---- concept tagger ----
// Word-embedding BiLSTM, a tanh combiner that mixes each hidden state with
// the averaged description vector, a second BiLSTM, and a per-token softmax
// over {B, I, O}.

struct CtConfig {
  std::size_t word_dim = kWordDim;
  std::size_t hidden1 = 256;
  std::size_t combined = 128;
  std::size_t hidden2 = 128;
};

struct CtModel {
  CtConfig cfg;
  Vocabulary vocab;
  ParamSet params;

  static CtModel create(CtConfig cfg, Vocabulary vocab, Tensor word_emb, std::uint64_t seed) {
    check(word_emb.rank() == 2 && word_emb.shape[0] == vocab.size() &&
              word_emb.shape[1] == cfg.word_dim,
          "CtModel: embedding matrix shape does not match vocabulary/config");
    CtModel m;
    m.cfg = cfg;
    m.vocab = std::move(vocab);
    Rng rng(seed);
    m.params.add("word_emb", std::move(word_emb));
    add_bilstm_params(m.params, "lstm1", cfg.word_dim, cfg.hidden1, rng);
    m.params.add("comb.w",
                 xavier_uniform_init({cfg.combined, 2 * cfg.hidden1 + cfg.word_dim}, rng));
    m.params.add("comb.b", Tensor::zeros({cfg.combined}));
    add_bilstm_params(m.params, "lstm2", cfg.combined, cfg.hidden2, rng);
    m.params.add("out.w", xavier_uniform_init({kNumTags, 2 * cfg.hidden2}, rng));
    m.params.add("out.b", Tensor::zeros({kNumTags}));
    return m;
  }

  std::vector<std::string> trainable() const {
    std::vector<std::string> names;
    for (const auto& n : params.names())
      if (n != "word_emb") names.push_back(n);
    return names;
  }

  struct Graph {
    NodeId word_emb;
    BiLstmNodes lstm1;
    NodeId comb_w, comb_b;
    BiLstmNodes lstm2;
    NodeId out_w, out_b;
    std::vector<std::pair<std::string, NodeId>> leaves;
  };

  Graph graph(Tape& tape) const {
    Graph g;
    g.word_emb = tape.leaf(params["word_emb"]);
    g.lstm1 = bilstm_nodes(tape, params, "lstm1");
    g.comb_w = tape.leaf(params["comb.w"]);
    g.comb_b = tape.leaf(params["comb.b"]);
    g.lstm2 = bilstm_nodes(tape, params, "lstm2");
    g.out_w = tape.leaf(params["out.w"]);
    g.out_b = tape.leaf(params["out.b"]);
    g.leaves = {{"word_emb", g.word_emb},     {"lstm1.fwd.w", g.lstm1.fwd.w},
                {"lstm1.fwd.b", g.lstm1.fwd.b}, {"lstm1.bwd.w", g.lstm1.bwd.w},
                {"lstm1.bwd.b", g.lstm1.bwd.b}, {"comb.w", g.comb_w},
                {"comb.b", g.comb_b},         {"lstm2.fwd.w", g.lstm2.fwd.w},
                {"lstm2.fwd.b", g.lstm2.fwd.b}, {"lstm2.bwd.w", g.lstm2.bwd.w},
                {"lstm2.bwd.b", g.lstm2.bwd.b}, {"out.w", g.out_w},
                {"out.b", g.out_b}};
    return g;
  }

  std::vector<NodeId> forward(Tape& tape, const Graph& g, const std::vector<std::string>& tokens,
                              const std::vector<std::string>& description) const {
    check(!tokens.empty(), "CtModel::forward: empty utterance");
    check(!description.empty(), "CtModel::forward: empty slot description");
    std::vector<NodeId> e;
    e.reserve(tokens.size());
    for (const auto& tok : tokens) e.push_back(tape.row(g.word_emb, vocab.lookup(tok)));
    std::vector<NodeId> h = bilstm_run(tape, g.lstm1, e, cfg.hidden1);

    // slot encoding: plain average of description word vectors
    NodeId q = tape.row(g.word_emb, vocab.lookup(description[0]));
    for (std::size_t j = 1; j < description.size(); ++j)
      q = tape.add(q, tape.row(g.word_emb, vocab.lookup(description[j])));
    q = tape.scale(q, 1.0 / static_cast<double>(description.size()));

    std::vector<NodeId> combined(h.size());
    for (std::size_t t = 0; t < h.size(); ++t)
      combined[t] =
          tape.tanh_op(tape.affine(g.comb_w, tape.concat({h[t], q}), g.comb_b));
    std::vector<NodeId> h2 = bilstm_run(tape, g.lstm2, combined, cfg.hidden2);

    std::vector<NodeId> u(h2.size());
    for (std::size_t t = 0; t < h2.size(); ++t)
      u[t] = tape.affine(g.out_w, h2[t], g.out_b);
    return u;
  }

  NodeId example_loss(Tape& tape, const Graph& g, const std::vector<std::string>& tokens,
                      const std::vector<std::string>& description, const TagSequence& gold,
                      Rng* = nullptr) const {
    return softmax_tag_nll(tape, forward(tape, g, tokens, description), gold);
  }

  TagSequence predict(const std::vector<std::string>& tokens,
                      const std::vector<std::string>& description) const {
    Tape tape;
    Graph g = graph(tape);
    std::vector<NodeId> u_cols = forward(tape, g, tokens, description);
    Tensor u({kNumTags, u_cols.size()});
    for (std::size_t t = 0; t < u_cols.size(); ++t)
      for (std::size_t j = 0; j < kNumTags; ++j) u.at(j, t) = tape.value(u_cols[t]).data[j];
    return greedy_decode(u);
  }
};

// ---- multi-domain LSTM tagger ----
// Closed tagset: O plus B-slot / I-slot for every slot known at creation.
// Char BiLSTM final states concatenated with the word vector feed a word
// BiLSTM and a dense softmax layer. Cannot tag slots outside its tagset.

struct LstmTaggerConfig {
  std::size_t word_dim = kWordDim;
  std::size_t char_dim = 16;
  std::size_t char_hidden = 25;
  std::size_t word_hidden = 100;
  double dropout_keep = 0.8;
};

struct LstmTagger {
  LstmTaggerConfig cfg;
  Vocabulary vocab;
  std::vector<std::string> slots;  // fixed tagset order
  ParamSet params;

  std::size_t num_tags() const { return 1 + 2 * slots.size(); }
  // tag layout: 0 = O, 1 + 2k = B-slots[k], 2 + 2k = I-slots[k]
  std::size_t b_tag(std::size_t k) const { return 1 + 2 * k; }
  std::size_t i_tag(std::size_t k) const { return 2 + 2 * k; }

  std::size_t slot_index(const std::string& slot_id) const {
    for (std::size_t k = 0; k < slots.size(); ++k)
      if (slots[k] == slot_id) return k;
    throw std::runtime_error("LstmTagger: slot " + slot_id + " not in tagset");
  }

  static LstmTagger create(LstmTaggerConfig cfg, Vocabulary vocab,
                           std::vector<std::string> slots, Tensor word_emb,
                           std::uint64_t seed) {
    check(!slots.empty(), "LstmTagger: empty slot list");
    check(word_emb.rank() == 2 && word_emb.shape[0] == vocab.size() &&
              word_emb.shape[1] == cfg.word_dim,
          "LstmTagger: embedding matrix shape does not match vocabulary/config");
    LstmTagger m;
    m.cfg = cfg;
    m.vocab = std::move(vocab);
    m.slots = std::move(slots);
    Rng rng(seed);
    m.params.add("word_emb", std::move(word_emb));
    m.params.add("char_emb", xavier_uniform_init({kCharVocabSize, cfg.char_dim}, rng));
    add_bilstm_params(m.params, "char", cfg.char_dim, cfg.char_hidden, rng);
    add_bilstm_params(m.params, "word", cfg.word_dim + 2 * cfg.char_hidden, cfg.word_hidden,
                      rng);
    m.params.add("out.w", xavier_uniform_init({m.num_tags(), 2 * cfg.word_hidden}, rng));
    m.params.add("out.b", Tensor::zeros({m.num_tags()}));
    return m;
  }

  std::vector<std::string> trainable() const {
    std::vector<std::string> names;
    for (const auto& n : params.names())
      if (n != "word_emb") names.push_back(n);
    return names;
  }

  struct Graph {
    NodeId word_emb;
    NodeId char_emb;
    BiLstmNodes char_lstm;
    BiLstmNodes word_lstm;
    NodeId out_w, out_b;
    std::vector<std::pair<std::string, NodeId>> leaves;
  };

  Graph graph(Tape& tape) const {
    Graph g;
    g.word_emb = tape.leaf(params["word_emb"]);
    g.char_emb = tape.leaf(params["char_emb"]);
    g.char_lstm = bilstm_nodes(tape, params, "char");
    g.word_lstm = bilstm_nodes(tape, params, "word");
    g.out_w = tape.leaf(params["out.w"]);
    g.out_b = tape.leaf(params["out.b"]);
    g.leaves = {{"word_emb", g.word_emb},
                {"char_emb", g.char_emb},
                {"char.fwd.w", g.char_lstm.fwd.w},
                {"char.fwd.b", g.char_lstm.fwd.b},
                {"char.bwd.w", g.char_lstm.bwd.w},
                {"char.bwd.b", g.char_lstm.bwd.b},
                {"word.fwd.w", g.word_lstm.fwd.w},
                {"word.fwd.b", g.word_lstm.fwd.b},
                {"word.bwd.w", g.word_lstm.bwd.w},
                {"word.bwd.b", g.word_lstm.bwd.b},
                {"out.w", g.out_w},
                {"out.b", g.out_b}};
    return g;
  }

  // [fwd final state; bwd final state] of the char BiLSTM.
  NodeId char_encode(Tape& tape, const Graph& g, const std::string& word) const {
    check(!word.empty(), "LstmTagger: empty word");
    std::vector<NodeId> chars;
    for (unsigned char c : word) chars.push_back(tape.row(g.char_emb, char_index(c)));
    std::vector<NodeId> fwd = lstm_run(tape, g.char_lstm.fwd, chars, cfg.char_hidden, false);
    std::vector<NodeId> bwd = lstm_run(tape, g.char_lstm.bwd, chars, cfg.char_hidden, true);
    return tape.concat({fwd.back(), bwd.front()});
  }

  std::vector<NodeId> forward(Tape& tape, const Graph& g,
                              const std::vector<std::string>& tokens,
                              Rng* dropout_rng = nullptr) const {
    check(!tokens.empty(), "LstmTagger::forward: empty utterance");
    std::vector<NodeId> e;
    e.reserve(tokens.size());
    for (const auto& tok : tokens) {
      NodeId x = tape.concat(
          {char_encode(tape, g, tok), tape.row(g.word_emb, vocab.lookup(tok))});
      if (dropout_rng && cfg.dropout_keep < 1.0)
        x = dropout(tape, x, cfg.dropout_keep, dropout_rng);
      e.push_back(x);
    }
    std::vector<NodeId> h = bilstm_run(tape, g.word_lstm, e, cfg.word_hidden);
    std::vector<NodeId> u(h.size());
    for (std::size_t t = 0; t < h.size(); ++t) u[t] = tape.affine(g.out_w, h[t], g.out_b);
    return u;
  }

  // Utterance spans as a sequence over the full tagset.
  TagSequence full_tags(const Utterance& utt) const {
    TagSequence tags(utt.tokens.size(), 0);
    for (const auto& s : utt.spans) {
      const std::size_t k = slot_index(s.slot_id);
      tags[s.start] = static_cast<int>(b_tag(k));
      for (std::size_t t = s.start + 1; t < s.end; ++t) tags[t] = static_cast<int>(i_tag(k));
    }
    return tags;
  }

  NodeId example_loss(Tape& tape, const Graph& g, const std::vector<std::string>& tokens,
                      const TagSequence& gold, Rng* dropout_rng = nullptr) const {
    std::vector<NodeId> u = forward(tape, g, tokens, dropout_rng);
    check(u.size() == gold.size(), "LstmTagger: gold length mismatch");
    NodeId loss = tape.cross_entropy(u[0], static_cast<std::size_t>(gold[0]));
    for (std::size_t t = 1; t < gold.size(); ++t)
      loss = tape.add(loss, tape.cross_entropy(u[t], static_cast<std::size_t>(gold[t])));
    return loss;
  }

  // Argmax decode over the full tagset, then spans per slot with the usual
  // orphan-I repair.
  std::vector<SlotSpan> predict(const std::vector<std::string>& tokens,
                                const std::string& utterance_id = "") const {
    Tape tape;
    Graph g = graph(tape);
    std::vector<NodeId> u = forward(tape, g, tokens);
    std::map<std::string, TagSequence> per_slot;
    for (std::size_t k = 0; k < slots.size(); ++k)
      per_slot[slots[k]] = TagSequence(tokens.size(), kTagO);
    for (std::size_t t = 0; t < u.size(); ++t) {
      const Tensor& v = tape.value(u[t]);
      std::size_t best = 0;
      for (std::size_t j = 1; j < v.data.size(); ++j)
        if (v.data[j] > v.data[best]) best = j;
      if (best == 0) continue;
      const std::size_t k = (best - 1) / 2;
      per_slot[slots[k]][t] = best == b_tag(k) ? kTagB : kTagI;
    }
    std::vector<SlotSpan> out;
    for (const auto& [slot, tags] : per_slot)
      for (auto [s, e] : bio_to_spans(tags)) out.push_back({slot, s, e, utterance_id});
    std::sort(out.begin(), out.end(), [](const SlotSpan& a, const SlotSpan& b) {
      return std::tie(a.start, a.end, a.slot_id) < std::tie(b.start, b.end, b.slot_id);
    });
    return out;
  }
};

}  // namespace zat
