#pragma once

#include <string>
#include <vector>

#include "zat/model/crf.hpp"
#include "zat/model/embedding.hpp"
#include "zat/model/encoder.hpp"

namespace zat {

// Inverted dropout; identity when keep >= 1 or no generator is supplied
// (inference).
inline NodeId dropout(Tape& tape, NodeId x, double keep, Rng* rng) {
  if (!rng || keep >= 1.0) return x;
  Tensor mask(tape.value(x).shape);
  for (double& v : mask.data) v = rng->uniform() < keep ? 1.0 / keep : 0.0;
  return tape.mul(x, tape.leaf(mask, "dropout_mask"));
}

struct ZatConfig {
  std::size_t word_dim = kWordDim;
  CharCnnConfig cnn{};  // char_dim 16, width 3, channels 100
  std::size_t ctx_hidden = 200;
  std::size_t cond_hidden = 200;
  std::size_t ff_hidden = 100;
  bool use_crf = true;
  bool use_char = true;
  bool weft = false;  // word-embedding fine-tuning
  bool structural_mask = true;
  double dropout_keep = 1.0;

  std::size_t emb_dim() const { return word_dim + (use_char ? cnn.channels : 0); }
  std::size_t d() const { return 2 * ctx_hidden; }
};

// The zero-shot slot tagger: shared contextual BiLSTM over sentence and
// slot description, attention over description words, conditional BiLSTM,
// feedforward emissions, CRF.
struct ZatModel {
  ZatConfig cfg;
  Vocabulary vocab;
  ParamSet params;

  static ZatModel create(ZatConfig cfg, Vocabulary vocab, Tensor word_emb,
                         std::uint64_t seed) {
    check(word_emb.rank() == 2 && word_emb.shape[0] == vocab.size() &&
              word_emb.shape[1] == cfg.word_dim,
          "ZatModel: embedding matrix shape does not match vocabulary/config");
    ZatModel m;
    m.cfg = cfg;
    m.vocab = std::move(vocab);
    Rng rng(seed);
    m.params.add("word_emb", std::move(word_emb));
    m.params.add("char_emb", xavier_uniform_init({kCharVocabSize, cfg.cnn.char_dim}, rng));
    m.params.add("cnn.filters",
                 xavier_uniform_init({cfg.cnn.channels, cfg.cnn.filter_width * cfg.cnn.char_dim}, rng));
    m.params.add("cnn.bias", Tensor::zeros({cfg.cnn.channels}));
    add_bilstm_params(m.params, "ctx", cfg.emb_dim(), cfg.ctx_hidden, rng);
    m.params.add("att.w", xavier_uniform_init({3 * cfg.d()}, rng));
    add_bilstm_params(m.params, "cond", cfg.d(), cfg.cond_hidden, rng);
    add_feedforward_params(m.params, "ff", 2 * cfg.cond_hidden, cfg.ff_hidden, kNumTags, rng);
    add_crf_params(m.params, "crf", rng, cfg.structural_mask);
    return m;
  }

  std::vector<std::string> trainable() const {
    std::vector<std::string> names;
    for (const auto& n : params.names())
      if (n != "word_emb" || cfg.weft) names.push_back(n);
    return names;
  }

  // Per-tape parameter leaves, shared across the examples of a batch.
  struct Graph {
    NodeId word_emb;
    CharCnnNodes cnn;
    BiLstmNodes ctx;
    NodeId att_w;
    BiLstmNodes cond;
    FeedforwardNodes ff;
    CrfNodes crf;
    std::vector<std::pair<std::string, NodeId>> leaves;
  };

  Graph graph(Tape& tape) const {
    Graph g;
    g.word_emb = tape.leaf(params["word_emb"]);
    g.cnn = {tape.leaf(params["char_emb"]), tape.leaf(params["cnn.filters"]),
             tape.leaf(params["cnn.bias"])};
    g.ctx = bilstm_nodes(tape, params, "ctx");
    g.att_w = tape.leaf(params["att.w"]);
    g.cond = bilstm_nodes(tape, params, "cond");
    g.ff = feedforward_nodes(tape, params, "ff");
    g.crf = crf_nodes(tape, params, "crf");
    g.leaves = {{"word_emb", g.word_emb},
                {"char_emb", g.cnn.char_emb},
                {"cnn.filters", g.cnn.filters},
                {"cnn.bias", g.cnn.bias},
                {"ctx.fwd.w", g.ctx.fwd.w},
                {"ctx.fwd.b", g.ctx.fwd.b},
                {"ctx.bwd.w", g.ctx.bwd.w},
                {"ctx.bwd.b", g.ctx.bwd.b},
                {"att.w", g.att_w},
                {"cond.fwd.w", g.cond.fwd.w},
                {"cond.fwd.b", g.cond.fwd.b},
                {"cond.bwd.w", g.cond.bwd.w},
                {"cond.bwd.b", g.cond.bwd.b},
                {"ff.w1", g.ff.w1},
                {"ff.b1", g.ff.b1},
                {"ff.w2", g.ff.w2},
                {"ff.b2", g.ff.b2},
                {"crf.trans", g.crf.trans},
                {"crf.start", g.crf.start},
                {"crf.end", g.crf.end}};
    return g;
  }

  struct Forward {
    std::vector<NodeId> u_cols;  // T nodes, each [3]
    std::vector<NodeId> a_rows;  // T nodes, each [J]
  };

  Forward forward(Tape& tape, const Graph& g, const std::vector<std::string>& tokens,
                  const std::vector<std::string>& description, Rng* dropout_rng = nullptr) const {
    check(!tokens.empty(), "ZatModel::forward: empty utterance");
    check(!description.empty(), "ZatModel::forward: empty slot description");
    std::vector<NodeId> e_sent =
        embed_tokens(tape, tokens, vocab, g.word_emb, g.cnn, cfg.cnn, cfg.use_char);
    std::vector<NodeId> e_desc =
        embed_tokens(tape, description, vocab, g.word_emb, g.cnn, cfg.cnn, cfg.use_char);
    if (dropout_rng && cfg.dropout_keep < 1.0) {
      for (auto& n : e_sent) n = dropout(tape, n, cfg.dropout_keep, dropout_rng);
      for (auto& n : e_desc) n = dropout(tape, n, cfg.dropout_keep, dropout_rng);
    }
    // the same BiLSTM encodes sentence and description
    std::vector<NodeId> x_cols = bilstm_run(tape, g.ctx, e_sent, cfg.ctx_hidden);
    std::vector<NodeId> q_cols = bilstm_run(tape, g.ctx, e_desc, cfg.ctx_hidden);
    AttentionOut att = attend(tape, x_cols, q_cols, g.att_w);
    Forward f;
    f.u_cols = condition_encode(tape, att.g_cols, x_cols, g.cond, cfg.cond_hidden, g.ff);
    f.a_rows = std::move(att.rows);
    return f;
  }

  NodeId example_loss(Tape& tape, const Graph& g, const std::vector<std::string>& tokens,
                      const std::vector<std::string>& description, const TagSequence& gold,
                      Rng* dropout_rng = nullptr) const {
    Forward f = forward(tape, g, tokens, description, dropout_rng);
    return cfg.use_crf ? crf_nll(tape, f.u_cols, g.crf, gold)
                       : softmax_tag_nll(tape, f.u_cols, gold);
  }

  Tensor emissions(const std::vector<std::string>& tokens,
                   const std::vector<std::string>& description) const {
    Tape tape;
    Graph g = graph(tape);
    Forward f = forward(tape, g, tokens, description);
    Tensor u({kNumTags, f.u_cols.size()});
    for (std::size_t t = 0; t < f.u_cols.size(); ++t)
      for (std::size_t j = 0; j < kNumTags; ++j) u.at(j, t) = tape.value(f.u_cols[t]).data[j];
    return u;
  }

  TagSequence predict(const std::vector<std::string>& tokens,
                      const std::vector<std::string>& description) const {
    Tensor u = emissions(tokens, description);
    if (cfg.use_crf) return viterbi_decode(u, crf_view(params, "crf")).first;
    return greedy_decode(u);
  }

  // Attention weights as a [T, J] matrix.
  Tensor attention_matrix(const std::vector<std::string>& tokens,
                          const std::vector<std::string>& description) const {
    Tape tape;
    Graph g = graph(tape);
    Forward f = forward(tape, g, tokens, description);
    Tensor a({tokens.size(), description.size()});
    for (std::size_t t = 0; t < tokens.size(); ++t)
      for (std::size_t j = 0; j < description.size(); ++j)
        a.at(t, j) = tape.value(f.a_rows[t]).data[j];
    return a;
  }
};

}  // namespace zat
