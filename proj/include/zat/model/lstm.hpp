#pragma once

#include <string>
#include <vector>

#include "zat/core/optim.hpp"
#include "zat/core/params.hpp"
#include "zat/core/tape.hpp"

namespace zat {

// One LSTM direction: packed gate weights [4h, in+h] and bias [4h], gate
// order i, f, o, g.
struct LstmNodes {
  NodeId w;
  NodeId b;
};

struct BiLstmNodes {
  LstmNodes fwd;
  LstmNodes bwd;
};

// Registers parameters for one BiLSTM. Forget-gate bias starts at 1.0.
inline void add_bilstm_params(ParamSet& params, const std::string& prefix, std::size_t in_dim,
                              std::size_t hidden, Rng& rng) {
  for (const char* dir : {".fwd", ".bwd"}) {
    params.add(prefix + dir + ".w", xavier_uniform_init({4 * hidden, in_dim + hidden}, rng));
    Tensor b = Tensor::zeros({4 * hidden});
    for (std::size_t i = hidden; i < 2 * hidden; ++i) b.data[i] = 1.0;
    params.add(prefix + dir + ".b", std::move(b));
  }
}

inline BiLstmNodes bilstm_nodes(Tape& tape, const ParamSet& params, const std::string& prefix) {
  return {{tape.leaf(params[prefix + ".fwd.w"]), tape.leaf(params[prefix + ".fwd.b"])},
          {tape.leaf(params[prefix + ".bwd.w"]), tape.leaf(params[prefix + ".bwd.b"])}};
}

// Unidirectional pass; returns per-step hidden states in input order.
inline std::vector<NodeId> lstm_run(Tape& tape, const LstmNodes& p,
                                    const std::vector<NodeId>& inputs, std::size_t hidden,
                                    bool reverse = false) {
  NodeId h = tape.leaf(Tensor::zeros({hidden}), "lstm_h0");
  NodeId c = tape.leaf(Tensor::zeros({hidden}), "lstm_c0");
  const std::size_t T = inputs.size();
  std::vector<NodeId> out(T);
  for (std::size_t step = 0; step < T; ++step) {
    const std::size_t t = reverse ? T - 1 - step : step;
    NodeId z = tape.affine(p.w, tape.concat({inputs[t], h}), p.b);
    NodeId i = tape.sigmoid(tape.slice(z, 0, hidden));
    NodeId f = tape.sigmoid(tape.slice(z, hidden, 2 * hidden));
    NodeId o = tape.sigmoid(tape.slice(z, 2 * hidden, 3 * hidden));
    NodeId g = tape.tanh_op(tape.slice(z, 3 * hidden, 4 * hidden));
    c = tape.add(tape.mul(f, c), tape.mul(i, g));
    h = tape.mul(o, tape.tanh_op(c));
    out[t] = h;
  }
  return out;
}

// Bidirectional pass; per-token [forward_h; backward_h] of length 2h.
inline std::vector<NodeId> bilstm_run(Tape& tape, const BiLstmNodes& p,
                                      const std::vector<NodeId>& inputs, std::size_t hidden) {
  std::vector<NodeId> fwd = lstm_run(tape, p.fwd, inputs, hidden, false);
  std::vector<NodeId> bwd = lstm_run(tape, p.bwd, inputs, hidden, true);
  std::vector<NodeId> out(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) out[t] = tape.concat({fwd[t], bwd[t]});
  return out;
}

}  // namespace zat
