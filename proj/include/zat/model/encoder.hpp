#pragma once

#include <string>
#include <vector>

#include "zat/model/lstm.hpp"

namespace zat {

// Attention of every sentence position over the slot-description words.
// Scores are alpha(x, q) = w . [x; q; x*q]; each row is softmax-normalized.
struct AttentionOut {
  std::vector<NodeId> rows;    // T nodes, each [J]: attention weights a_t
  std::vector<NodeId> g_cols;  // T nodes, each [d]: slot-aware vectors
};

inline AttentionOut attend(Tape& tape, const std::vector<NodeId>& x_cols,
                           const std::vector<NodeId>& q_cols, NodeId w) {
  check(!x_cols.empty() && !q_cols.empty(), "attend: empty inputs");
  NodeId q_mat = tape.concat_cols(q_cols);  // [d, J]
  AttentionOut out;
  out.rows.reserve(x_cols.size());
  out.g_cols.reserve(x_cols.size());
  for (NodeId x : x_cols) {
    std::vector<NodeId> scores;
    scores.reserve(q_cols.size());
    for (NodeId q : q_cols)
      scores.push_back(tape.dot(w, tape.concat({x, q, tape.mul(x, q)})));
    NodeId a = tape.softmax(tape.stack(scores));
    out.rows.push_back(a);
    out.g_cols.push_back(tape.matmul(q_mat, a));  // sum_j a_tj * q_j
  }
  return out;
}

// Two-layer feedforward emitting per-token label scores.
struct FeedforwardNodes {
  NodeId w1, b1, w2, b2;
};

inline void add_feedforward_params(ParamSet& params, const std::string& prefix,
                                   std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                                   Rng& rng) {
  params.add(prefix + ".w1", xavier_uniform_init({hidden, in_dim}, rng));
  params.add(prefix + ".b1", Tensor::zeros({hidden}));
  params.add(prefix + ".w2", xavier_uniform_init({out_dim, hidden}, rng));
  params.add(prefix + ".b2", Tensor::zeros({out_dim}));
}

inline FeedforwardNodes feedforward_nodes(Tape& tape, const ParamSet& params,
                                          const std::string& prefix) {
  return {tape.leaf(params[prefix + ".w1"]), tape.leaf(params[prefix + ".b1"]),
          tape.leaf(params[prefix + ".w2"]), tape.leaf(params[prefix + ".b2"])};
}

inline NodeId feedforward(Tape& tape, const FeedforwardNodes& ff, NodeId x) {
  return tape.affine(ff.w2, tape.tanh_op(tape.affine(ff.w1, x, ff.b1)), ff.b2);
}

// Conditional encoder: H = G + X elementwise, a second BiLSTM, then the
// feedforward emission head. Returns per-token [3] score columns.
inline std::vector<NodeId> condition_encode(Tape& tape, const std::vector<NodeId>& g_cols,
                                            const std::vector<NodeId>& x_cols,
                                            const BiLstmNodes& cond, std::size_t cond_hidden,
                                            const FeedforwardNodes& ff) {
  check(g_cols.size() == x_cols.size(), "condition_encode: G/X length mismatch");
  std::vector<NodeId> h_cols(x_cols.size());
  for (std::size_t t = 0; t < x_cols.size(); ++t) h_cols[t] = tape.add(g_cols[t], x_cols[t]);
  std::vector<NodeId> enc = bilstm_run(tape, cond, h_cols, cond_hidden);
  std::vector<NodeId> u_cols(enc.size());
  for (std::size_t t = 0; t < enc.size(); ++t) u_cols[t] = feedforward(tape, ff, enc[t]);
  return u_cols;
}

}  // namespace zat
