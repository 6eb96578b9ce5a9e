#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "zat/core/optim.hpp"
#include "zat/data/types.hpp"
#include "zat/data/split.hpp"
#include "zat/eval/eval.hpp"
#include "zat/tagger/examples.hpp"

namespace zat {

struct TrainConfig {
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double clip_norm = 5.0;
  std::size_t max_epochs = 10;
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  std::size_t dev_cap = 200;  // dev utterances used for early stopping
};

struct TrainResult {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 1-based; 0 when no dev evaluation happened
  double best_dev_f1 = 0.0;
  std::vector<double> epoch_losses;
  std::vector<double> dev_f1;
};

// Per-slot decode of a whole utterance against a catalog, with conflict
// resolution. The merge draw is keyed on the utterance id, so a prediction
// does not depend on which other utterances are evaluated alongside it.
template <typename Model>
std::vector<SlotSpan> predict_utterance(const Model& model, const Utterance& utt,
                                        const std::vector<SlotDescription>& catalog,
                                        std::uint64_t seed) {
  std::map<std::string, TagSequence> per_slot;
  for (const auto& slot : catalog)
    per_slot[slot.slot_id] = model.predict(utt.tokens, slot.description);
  Rng rng(seed ^ fnv1a("merge:" + utt.id));
  return merge_slot_predictions(per_slot, rng, utt.id);
}

template <typename Model>
double dev_span_f1(const Model& model, const std::vector<Utterance>& dev,
                   const std::vector<SlotDescription>& catalog, std::uint64_t seed) {
  std::vector<SlotSpan> gold, pred;
  for (const auto& u : dev) {
    for (const auto& s : u.spans) gold.push_back(s);
    for (const auto& s : predict_utterance(model, u, catalog, seed)) pred.push_back(s);
  }
  if (gold.empty() && pred.empty()) return 0.0;
  return span_f1(gold, pred).micro.f1();
}

namespace detail {

// One optimizer step on the mean loss of a batch. `losses` must all live
// on `tape` with parameter leaves from `leaves`.
inline void apply_batch(Tape& tape, const std::vector<NodeId>& losses,
                        const std::vector<std::pair<std::string, NodeId>>& leaves,
                        ParamSet& params, const std::vector<std::string>& trainable,
                        AdamState& adam, double clip_norm, double* loss_out) {
  NodeId total = losses[0];
  for (std::size_t i = 1; i < losses.size(); ++i) total = tape.add(total, losses[i]);
  NodeId mean = tape.scale(total, 1.0 / static_cast<double>(losses.size()));
  const double loss = tape.value(mean).data[0];
  check(std::isfinite(loss), "training diverged: non-finite batch loss");
  tape.backward(mean);

  ParamSet grads;
  for (const auto& name : trainable)
    for (const auto& [leaf_name, node] : leaves)
      if (leaf_name == name) grads.add(name, tape.grad(node));
  clip_global_norm(grads, clip_norm);
  adam_step(params, grads, adam, trainable);
  if (loss_out) *loss_out += loss * static_cast<double>(losses.size());
}

inline std::vector<Utterance> dev_subset(const std::vector<Utterance>& dev, std::size_t cap,
                                         std::uint64_t seed) {
  if (dev.size() <= cap) return dev;
  return stratified_sample(dev, cap, Rng(seed ^ fnv1a("dev_subset")));
}

}  // namespace detail

// Mini-batch Adam training for the per-slot models (ZAT and the concept
// tagger). Early stopping on span F1 over a fixed seeded dev subset; the
// best-scoring parameters are restored on return. Empty `examples` is a
// no-op, which makes zero-shot "fine-tuning" leave the base model intact.
template <typename Model>
TrainResult train_slot_model(Model& model, const std::vector<SlotExample>& examples,
                             const std::vector<Utterance>& dev,
                             const std::vector<SlotDescription>& catalog,
                             const TrainConfig& cfg) {
  TrainResult res;
  if (examples.empty()) return res;
  check(cfg.batch_size > 0 && cfg.max_epochs > 0, "train: bad config");

  const std::vector<std::string> trainable = model.trainable();
  AdamState adam;
  adam.lr = cfg.lr;
  const std::vector<Utterance> dev_eval = detail::dev_subset(dev, cfg.dev_cap, cfg.seed);

  Rng shuffle_rng(cfg.seed ^ fnv1a("shuffle"));
  ParamSet best_params = model.params;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    Rng drop_rng(cfg.seed ^ fnv1a("dropout") ^ epoch);
    double epoch_loss = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      Tape tape;
      auto g = model.graph(tape);
      std::vector<NodeId> losses;
      for (std::size_t i = b; i < std::min(b + cfg.batch_size, order.size()); ++i) {
        const SlotExample& ex = examples[order[i]];
        losses.push_back(model.example_loss(tape, g, ex.utterance->tokens,
                                            ex.slot->description, ex.gold, &drop_rng));
      }
      detail::apply_batch(tape, losses, g.leaves, model.params, trainable, adam,
                          cfg.clip_norm, &epoch_loss);
    }
    res.epoch_losses.push_back(epoch_loss / static_cast<double>(examples.size()));
    res.epochs_run = epoch;

    if (dev_eval.empty()) continue;
    const double f1 = dev_span_f1(model, dev_eval, catalog, cfg.seed);
    res.dev_f1.push_back(f1);
    if (f1 > res.best_dev_f1 || res.best_epoch == 0) {
      res.best_dev_f1 = f1;
      res.best_epoch = epoch;
      best_params = model.params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  if (!dev_eval.empty()) model.params = best_params;
  return res;
}

// Adaptation to a target domain continues from the given parameters; the
// architecture is unchanged, so zero target data reduces to the zero-shot
// base model.
template <typename Model>
TrainResult fine_tune(Model& model, const std::vector<SlotExample>& target_examples,
                      const std::vector<Utterance>& target_dev,
                      const std::vector<SlotDescription>& target_catalog,
                      const TrainConfig& cfg) {
  return train_slot_model(model, target_examples, target_dev, target_catalog, cfg);
}

// Whole-utterance training for the closed-tagset LSTM baseline.
template <typename Model>
TrainResult train_utterance_tagger(Model& model, const std::vector<Utterance>& train,
                                   const std::vector<Utterance>& dev, const TrainConfig& cfg) {
  TrainResult res;
  if (train.empty()) return res;
  check(cfg.batch_size > 0 && cfg.max_epochs > 0, "train: bad config");

  const std::vector<std::string> trainable = model.trainable();
  AdamState adam;
  adam.lr = cfg.lr;
  const std::vector<Utterance> dev_eval = detail::dev_subset(dev, cfg.dev_cap, cfg.seed);

  Rng shuffle_rng(cfg.seed ^ fnv1a("shuffle"));
  ParamSet best_params = model.params;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    Rng drop_rng(cfg.seed ^ fnv1a("dropout") ^ epoch);
    double epoch_loss = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      Tape tape;
      auto g = model.graph(tape);
      std::vector<NodeId> losses;
      for (std::size_t i = b; i < std::min(b + cfg.batch_size, order.size()); ++i) {
        const Utterance& u = train[order[i]];
        losses.push_back(
            model.example_loss(tape, g, u.tokens, model.full_tags(u), &drop_rng));
      }
      detail::apply_batch(tape, losses, g.leaves, model.params, trainable, adam,
                          cfg.clip_norm, &epoch_loss);
    }
    res.epoch_losses.push_back(epoch_loss / static_cast<double>(train.size()));
    res.epochs_run = epoch;

    if (dev_eval.empty()) continue;
    std::vector<SlotSpan> gold, pred;
    for (const auto& u : dev_eval) {
      for (const auto& s : u.spans) gold.push_back(s);
      for (const auto& s : model.predict(u.tokens, u.id)) pred.push_back(s);
    }
    const double f1 = gold.empty() && pred.empty() ? 0.0 : span_f1(gold, pred).micro.f1();
    res.dev_f1.push_back(f1);
    if (f1 > res.best_dev_f1 || res.best_epoch == 0) {
      res.best_dev_f1 = f1;
      res.best_epoch = epoch;
      best_params = model.params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  if (!dev_eval.empty()) model.params = best_params;
  return res;
}

// ---- cross-domain pooling ----

// Owns the pooled storage the slot examples point into. Keep it alive as
// long as the examples are used.
struct JointData {
  std::vector<Utterance> utterances;
  std::vector<Utterance> dev;
  std::vector<SlotDescription> catalog;
  std::vector<SlotExample> examples;
};

// Pools the train splits of every source domain except the held-out
// target: an intent-stratified take per source, a deduplicated union
// catalog, and per-slot examples over the pooled utterances.
inline JointData build_joint_dataset(const std::vector<DomainDataset>& corpus,
                                     const std::string& exclude_domain,
                                     std::size_t take_per_source, std::uint64_t seed,
                                     std::size_t neg_ratio = 3) {
  JointData joint;
  for (const auto& ds : corpus) {
    if (ds.domain == exclude_domain) continue;
    const std::size_t take = std::min(take_per_source, ds.train.size());
    auto sample = stratified_sample(ds.train, take, Rng(seed ^ fnv1a("take:" + ds.domain)));
    for (auto& u : sample) joint.utterances.push_back(std::move(u));
    for (const auto& u : ds.dev) joint.dev.push_back(u);
    for (const auto& slot : ds.catalog) {
      bool present = false;
      for (const auto& have : joint.catalog)
        if (have.slot_id == slot.slot_id) {
          check(have.description == slot.description,
                "build_joint_dataset: conflicting descriptions for slot " + slot.slot_id);
          present = true;
        }
      if (!present) joint.catalog.push_back(slot);
    }
  }
  check(!joint.utterances.empty(), "build_joint_dataset: no source domains");
  Rng ex_rng(seed ^ fnv1a("examples"));
  joint.examples = build_slot_examples(joint.utterances, joint.catalog, ex_rng, neg_ratio);
  return joint;
}

}  // namespace zat
