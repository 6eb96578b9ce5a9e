#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "zat/core/optim.hpp"
#include "zat/core/params.hpp"
#include "zat/core/rng.hpp"
#include "zat/core/tape.hpp"

namespace zat {

// Per-slot tagset.
inline constexpr int kTagB = 0;
inline constexpr int kTagI = 1;
inline constexpr int kTagO = 2;
inline constexpr std::size_t kNumTags = 3;

using TagSequence = std::vector<int>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Linear-chain potentials over {B, I, O}.
struct CrfParams {
  Tensor trans = Tensor::zeros({kNumTags, kNumTags});  // [from, to]
  Tensor start = Tensor::zeros({kNumTags});
  Tensor end = Tensor::zeros({kNumTags});
};

inline void add_crf_params(ParamSet& params, const std::string& prefix, Rng& rng,
                           bool structural_mask) {
  Tensor trans = xavier_uniform_init({kNumTags, kNumTags}, rng);
  Tensor start = xavier_uniform_init({kNumTags}, rng);
  Tensor end = xavier_uniform_init({kNumTags}, rng);
  if (structural_mask) {
    trans.at(kTagO, kTagI) = kNegInf;  // O -> I forbidden
    start.data[kTagI] = kNegInf;       // cannot start with I
  }
  params.add(prefix + ".trans", std::move(trans));
  params.add(prefix + ".start", std::move(start));
  params.add(prefix + ".end", std::move(end));
}

inline CrfParams crf_view(const ParamSet& params, const std::string& prefix) {
  return {params[prefix + ".trans"], params[prefix + ".start"], params[prefix + ".end"]};
}

// True iff no I follows O and the sequence does not start with I.
inline bool is_valid_bio(const TagSequence& y) {
  int prev = kTagO;
  for (int t : y) {
    if (t == kTagI && prev == kTagO) return false;
    prev = t;
  }
  return true;
}

// ---- plain (non-differentiable) computations over U: [3, T] ----

inline double sequence_score(const Tensor& u, const CrfParams& crf, const TagSequence& y) {
  check(u.rank() == 2 && u.shape[0] == kNumTags, "sequence_score: U must be [3, T]");
  const std::size_t T = u.shape[1];
  check(y.size() == T, "sequence_score: length mismatch");
  double s = crf.start.data[y[0]] + u.at(y[0], 0);
  for (std::size_t t = 1; t < T; ++t)
    s += crf.trans.at(y[t - 1], y[t]) + u.at(y[t], t);
  return s + crf.end.data[y.back()];
}

namespace detail {
inline double lse3(const double* v) {
  double mx = std::max({v[0], v[1], v[2]});
  if (std::isinf(mx) && mx < 0) return mx;
  return mx + std::log(std::exp(v[0] - mx) + std::exp(v[1] - mx) + std::exp(v[2] - mx));
}
}  // namespace detail

// Forward recursion with log-sum-exp.
inline double log_partition(const Tensor& u, const CrfParams& crf) {
  check(u.rank() == 2 && u.shape[0] == kNumTags && u.shape[1] >= 1,
        "log_partition: U must be [3, T], T >= 1");
  const std::size_t T = u.shape[1];
  double alpha[kNumTags], next[kNumTags], tmp[kNumTags];
  for (std::size_t j = 0; j < kNumTags; ++j) alpha[j] = crf.start.data[j] + u.at(j, 0);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < kNumTags; ++j) {
      for (std::size_t i = 0; i < kNumTags; ++i) tmp[i] = alpha[i] + crf.trans.at(i, j);
      next[j] = detail::lse3(tmp) + u.at(j, t);
    }
    std::copy(next, next + kNumTags, alpha);
  }
  for (std::size_t j = 0; j < kNumTags; ++j) alpha[j] += crf.end.data[j];
  return detail::lse3(alpha);
}

// Max-product decoding; ties broken toward the lowest label index (B < I < O).
inline std::pair<TagSequence, double> viterbi_decode(const Tensor& u, const CrfParams& crf) {
  check(u.rank() == 2 && u.shape[0] == kNumTags && u.shape[1] >= 1,
        "viterbi_decode: U must be [3, T], T >= 1");
  const std::size_t T = u.shape[1];
  std::vector<std::array<double, kNumTags>> delta(T);
  std::vector<std::array<int, kNumTags>> back(T);
  for (std::size_t j = 0; j < kNumTags; ++j) delta[0][j] = crf.start.data[j] + u.at(j, 0);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t j = 0; j < kNumTags; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (std::size_t i = 0; i < kNumTags; ++i) {
        const double s = delta[t - 1][i] + crf.trans.at(i, j);
        if (s > best) {
          best = s;
          arg = static_cast<int>(i);
        }
      }
      delta[t][j] = best + u.at(j, t);
      back[t][j] = arg;
    }
  double best = kNegInf;
  int arg = 0;
  for (std::size_t j = 0; j < kNumTags; ++j) {
    const double s = delta[T - 1][j] + crf.end.data[j];
    if (s > best) {
      best = s;
      arg = static_cast<int>(j);
    }
  }
  TagSequence y(T);
  y[T - 1] = arg;
  for (std::size_t t = T - 1; t > 0; --t) y[t - 1] = back[t][y[t]];
  return {y, best};
}

// ---- exhaustive oracles (test support; guarded against 3^T blowup) ----

inline std::pair<TagSequence, double> brute_force_decode(const Tensor& u, const CrfParams& crf) {
  const std::size_t T = u.shape[1];
  check(T <= 10, "brute_force_decode: T too large");
  std::size_t total = 1;
  for (std::size_t t = 0; t < T; ++t) total *= kNumTags;
  TagSequence best_y;
  double best = kNegInf;
  TagSequence y(T);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t t = 0; t < T; ++t) {
      y[t] = static_cast<int>(c % kNumTags);
      c /= kNumTags;
    }
    const double s = sequence_score(u, crf, y);
    if (s > best) {
      best = s;
      best_y = y;
    }
  }
  return {best_y, best};
}

inline double brute_force_logZ(const Tensor& u, const CrfParams& crf) {
  const std::size_t T = u.shape[1];
  check(T <= 10, "brute_force_logZ: T too large");
  std::size_t total = 1;
  for (std::size_t t = 0; t < T; ++t) total *= kNumTags;
  // max-subtracted accumulation over all sequences
  std::vector<double> scores;
  scores.reserve(total);
  TagSequence y(T);
  double mx = kNegInf;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t t = 0; t < T; ++t) {
      y[t] = static_cast<int>(c % kNumTags);
      c /= kNumTags;
    }
    scores.push_back(sequence_score(u, crf, y));
    mx = std::max(mx, scores.back());
  }
  double s = 0;
  for (double v : scores) s += std::exp(v - mx);
  return mx + std::log(s);
}

// ---- differentiable loss on the tape ----

struct CrfNodes {
  NodeId trans;
  NodeId start;
  NodeId end;
};

inline CrfNodes crf_nodes(Tape& tape, const ParamSet& params, const std::string& prefix) {
  return {tape.leaf(params[prefix + ".trans"]), tape.leaf(params[prefix + ".start"]),
          tape.leaf(params[prefix + ".end"])};
}

// Forward recursion on the tape; differentiable log Z.
inline NodeId crf_log_partition(Tape& tape, const std::vector<NodeId>& u_cols,
                                const CrfNodes& crf) {
  check(!u_cols.empty(), "crf_log_partition: empty sequence");
  NodeId alpha = tape.add(crf.start, u_cols[0]);
  for (std::size_t t = 1; t < u_cols.size(); ++t) {
    std::vector<NodeId> next(kNumTags);
    for (std::size_t j = 0; j < kNumTags; ++j)
      next[j] = tape.logsumexp(tape.add(alpha, tape.col(crf.trans, j)));
    alpha = tape.add(tape.stack(next), u_cols[t]);
  }
  return tape.logsumexp(tape.add(alpha, crf.end));
}

// Negative log-likelihood of `gold` given per-token emission columns
// (each a [3] node).
inline NodeId crf_nll(Tape& tape, const std::vector<NodeId>& u_cols, const CrfNodes& crf,
                      const TagSequence& gold) {
  const std::size_t T = u_cols.size();
  check(T >= 1 && gold.size() == T, "crf_nll: length mismatch");
  check(is_valid_bio(gold), "crf_nll: structurally invalid gold sequence");
  NodeId log_z = crf_log_partition(tape, u_cols, crf);

  NodeId score = tape.add(tape.elem(crf.start, gold[0]), tape.elem(u_cols[0], gold[0]));
  for (std::size_t t = 1; t < T; ++t) {
    NodeId trans_e = tape.elem(tape.row(crf.trans, gold[t - 1]), gold[t]);
    score = tape.add(score, tape.add(trans_e, tape.elem(u_cols[t], gold[t])));
  }
  score = tape.add(score, tape.elem(crf.end, gold.back()));
  return tape.sub(log_z, score);
}

// -CRF ablation path: per-token cross entropy.
inline NodeId softmax_tag_nll(Tape& tape, const std::vector<NodeId>& u_cols,
                              const TagSequence& gold) {
  check(u_cols.size() == gold.size() && !gold.empty(), "softmax_tag_nll: length mismatch");
  NodeId loss = tape.cross_entropy(u_cols[0], gold[0]);
  for (std::size_t t = 1; t < gold.size(); ++t)
    loss = tape.add(loss, tape.cross_entropy(u_cols[t], gold[t]));
  return loss;
}

// -CRF decoding: per-token argmax with a greedy repair of orphan I tags.
inline TagSequence greedy_decode(const Tensor& u) {
  const std::size_t T = u.shape[1];
  TagSequence y(T);
  for (std::size_t t = 0; t < T; ++t) {
    int arg = 0;
    for (std::size_t j = 1; j < kNumTags; ++j)
      if (u.at(j, t) > u.at(arg, t)) arg = static_cast<int>(j);
    y[t] = arg;
  }
  int prev = kTagO;
  for (auto& t : y) {
    if (t == kTagI && prev == kTagO) t = kTagB;
    prev = t;
  }
  return y;
}

}  // namespace zat
