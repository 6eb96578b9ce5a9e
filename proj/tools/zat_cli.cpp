#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zat/data/embedding_fixture.hpp"
#include "zat/data/generator.hpp"
#include "zat/data/io.hpp"
#include "zat/eval/eval.hpp"
#include "zat/model/model_io.hpp"
#include "zat/train/train.hpp"

using namespace zat;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  check(out.good(), "cannot open " + path);
  out << text;
  check(out.good(), "write failed for " + path);
}

// Every command records what produced its outputs: the resolved config,
// inputs, and a hash usable to spot drift between reruns.
void write_manifest(const std::string& out_path, const std::string& command, json config) {
  json manifest{{"command", command}, {"config", std::move(config)}};
  manifest["config_hash"] = fnv1a(manifest.dump());
  write_text(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

std::vector<std::string> domains_in_dir(const std::string& dir) {
  std::vector<std::string> names;
  const std::string suffix = ".catalog.jsonl";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string f = entry.path().filename().string();
    if (f.size() > suffix.size() && f.ends_with(suffix))
      names.push_back(f.substr(0, f.size() - suffix.size()));
  }
  std::sort(names.begin(), names.end());
  check(!names.empty(), "no domain files found in " + dir);
  return names;
}

std::vector<DomainDataset> load_corpus(const std::string& dir,
                                       const std::vector<std::string>& only = {}) {
  std::vector<DomainDataset> corpus;
  for (const auto& name : only.empty() ? domains_in_dir(dir) : only)
    corpus.push_back(load_domain(dir, name));
  return corpus;
}

struct ModelOpts {
  std::size_t word_dim = kWordDim;
  std::size_t char_dim = 16;
  std::size_t channels = 100;
  std::size_t ctx_hidden = 200;
  std::size_t cond_hidden = 200;
  std::size_t ff_hidden = 100;
  bool no_crf = false;
  bool no_char = false;
  bool weft = false;
  std::string embeddings;  // optional pretrained vector file

  ZatConfig zat_config() const {
    ZatConfig cfg;
    cfg.word_dim = word_dim;
    cfg.cnn = {char_dim, 3, channels};
    cfg.ctx_hidden = ctx_hidden;
    cfg.cond_hidden = cond_hidden;
    cfg.ff_hidden = ff_hidden;
    cfg.use_crf = !no_crf;
    cfg.use_char = !no_char;
    cfg.weft = weft;
    return cfg;
  }

  std::pair<Vocabulary, Tensor> embedding_table() const {
    if (embeddings.empty()) return fixture_embeddings(word_dim);
    check(word_dim == kWordDim, "pretrained vector files carry " +
                                    std::to_string(kWordDim) + "-dim vectors");
    auto [vocab, emb] = load_pretrained(embeddings);
    return {std::move(vocab), std::move(emb.weights)};
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--word-dim", word_dim, "word vector dimension");
    cmd->add_option("--char-dim", char_dim, "char embedding dimension");
    cmd->add_option("--channels", channels, "char CNN channels");
    cmd->add_option("--ctx-hidden", ctx_hidden, "contextual LSTM units per direction");
    cmd->add_option("--cond-hidden", cond_hidden, "conditional LSTM units per direction");
    cmd->add_option("--ff-hidden", ff_hidden, "feedforward hidden units");
    cmd->add_flag("--no-crf", no_crf, "softmax output instead of the CRF layer");
    cmd->add_flag("--no-char", no_char, "drop the character CNN");
    cmd->add_flag("--weft", weft, "fine-tune the word embeddings");
    cmd->add_option("--embeddings", embeddings, "pretrained word vector file");
  }

  json to_json() const {
    return {{"word_dim", word_dim},   {"char_dim", char_dim},
            {"channels", channels},   {"ctx_hidden", ctx_hidden},
            {"cond_hidden", cond_hidden}, {"ff_hidden", ff_hidden},
            {"no_crf", no_crf},       {"no_char", no_char},
            {"weft", weft},           {"embeddings", embeddings}};
  }
};

struct TrainOpts {
  TrainConfig cfg;
  std::size_t neg_ratio = 3;

  void attach(CLI::App* cmd) {
    cmd->add_option("--batch", cfg.batch_size, "mini-batch size");
    cmd->add_option("--lr", cfg.lr, "Adam learning rate");
    cmd->add_option("--clip", cfg.clip_norm, "global gradient norm cap");
    cmd->add_option("--epochs", cfg.max_epochs, "maximum epochs");
    cmd->add_option("--patience", cfg.patience, "non-improving epochs before stopping");
    cmd->add_option("--dev-cap", cfg.dev_cap, "dev utterances used for early stopping");
    cmd->add_option("--neg-ratio", neg_ratio, "negatives per positive slot example");
  }

  json to_json() const {
    return {{"batch", cfg.batch_size}, {"lr", cfg.lr},
            {"clip", cfg.clip_norm},   {"epochs", cfg.max_epochs},
            {"patience", cfg.patience}, {"dev_cap", cfg.dev_cap},
            {"neg_ratio", neg_ratio}};
  }
};

std::string training_log(const TrainResult& res) {
  std::string log = "epoch\tloss\tdev_f1\tbest\n";
  for (std::size_t e = 0; e < res.epochs_run; ++e) {
    log += std::to_string(e + 1) + "\t" + fmt(res.epoch_losses[e], 6) + "\t";
    log += e < res.dev_f1.size() ? fmt(res.dev_f1[e]) : std::string("-");
    log += std::string("\t") + (e + 1 == res.best_epoch ? "*" : "-") + "\n";
  }
  return log;
}

// Gold spans and model predictions for a split, optionally restricted to a
// slot subset.
struct SplitPredictions {
  std::vector<SlotSpan> gold, pred;
};

template <typename Model>
SplitPredictions predict_split(const Model& model, const std::vector<Utterance>& split,
                               const std::vector<SlotDescription>& catalog,
                               std::uint64_t seed) {
  SplitPredictions out;
  std::set<std::string> allowed;
  for (const auto& s : catalog) allowed.insert(s.slot_id);
  for (const auto& u : split) {
    for (const auto& s : u.spans)
      if (allowed.count(s.slot_id)) out.gold.push_back(s);
    for (const auto& s : predict_utterance(model, u, catalog, seed)) out.pred.push_back(s);
  }
  return out;
}

SplitPredictions predict_split_lstm(const LstmTagger& model,
                                    const std::vector<Utterance>& split,
                                    const std::set<std::string>& allowed) {
  SplitPredictions out;
  for (const auto& u : split) {
    for (const auto& s : u.spans)
      if (allowed.count(s.slot_id)) out.gold.push_back(s);
    for (const auto& s : model.predict(u.tokens, u.id))
      if (allowed.count(s.slot_id)) out.pred.push_back(s);
  }
  return out;
}

std::vector<SlotDescription> restrict_catalog(const std::vector<SlotDescription>& catalog,
                                              const std::vector<std::string>& slots) {
  if (slots.empty()) return catalog;
  std::vector<SlotDescription> out;
  for (const auto& id : slots) {
    bool found = false;
    for (const auto& s : catalog)
      if (s.slot_id == id) {
        out.push_back(s);
        found = true;
      }
    check(found, "slot " + id + " is not in the catalog");
  }
  return out;
}

SplitPredictions evaluate_checkpoint(const std::string& ckpt,
                                     const std::vector<Utterance>& split,
                                     const std::vector<SlotDescription>& catalog,
                                     std::uint64_t seed) {
  const std::string kind = checkpoint_kind(ckpt);
  if (kind == "zat") return predict_split(load_zat(ckpt), split, catalog, seed);
  if (kind == "ct") return predict_split(load_ct(ckpt), split, catalog, seed);
  check(kind == "lstm", "unknown model kind " + kind);
  std::set<std::string> allowed;
  for (const auto& s : catalog) allowed.insert(s.slot_id);
  return predict_split_lstm(load_lstm_tagger(ckpt), split, allowed);
}

std::string report_table(const EvalReport& rep) {
  std::string t = "slot\ttp\tfp\tfn\tprecision\trecall\tf1\n";
  auto row = [&](const std::string& name, const SlotMetrics& m) {
    t += name + "\t" + std::to_string(m.tp) + "\t" + std::to_string(m.fp) + "\t" +
         std::to_string(m.fn) + "\t" + fmt(m.precision()) + "\t" + fmt(m.recall()) + "\t" +
         fmt(m.f1()) + "\n";
  };
  for (const auto& [slot, m] : rep.per_slot) row(slot, m);
  row("micro", rep.micro);
  return t;
}

// Base training on pooled sources, shared by train-base and ablate.
template <typename Model>
TrainResult run_base_training(Model& model, const JointData& joint, TrainConfig cfg) {
  return train_slot_model(model, joint.examples, joint.dev, joint.catalog, cfg);
}

// Fine-tuning stage shared by finetune, ablate, and sweep: n target train
// utterances, target dev for early stopping.
template <typename Model>
TrainResult run_fine_tune(Model& model, const DomainDataset& target, std::size_t n,
                          TrainConfig cfg, std::size_t neg_ratio) {
  std::vector<Utterance> sample;
  if (n > 0) {
    check(n <= target.train.size(), "target has only " +
                                        std::to_string(target.train.size()) +
                                        " training utterances");
    sample = stratified_sample(target.train, n, Rng(cfg.seed ^ fnv1a("target_take")));
  }
  Rng ex_rng(cfg.seed ^ fnv1a("target_examples"));
  auto examples = build_slot_examples(sample, target.catalog, ex_rng, neg_ratio);
  return fine_tune(model, examples, target.dev, target.catalog, cfg);
}

double test_f1(const std::string& ckpt, const DomainDataset& target, std::uint64_t seed) {
  auto sp = evaluate_checkpoint(ckpt, target.test, target.catalog, seed);
  return span_f1(sp.gold, sp.pred).micro.f1();
}

int run(int argc, char** argv) {
  CLI::App app{"zero-shot adaptive-transfer slot tagger"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // ---- gen-data ----
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic multi-domain corpus");
  GeneratorSpec gen_spec;
  std::string gen_out, gen_domains;
  bool gen_vectors = false;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_spec.seed, "generator seed");
  gen->add_option("--per-domain", gen_spec.utterances_per_domain, "utterances per domain");
  gen->add_option("--domains", gen_domains, "comma-separated domain subset");
  gen->add_flag("--vectors", gen_vectors, "also write the word vector fixture file");
  gen->callback([&] {
    gen_spec.domains = split_csv(gen_domains);
    auto corpus = generate_corpus(gen_spec);
    fs::create_directories(gen_out);
    for (const auto& ds : corpus) save_domain(ds, gen_out);
    if (gen_vectors) write_fixture_embeddings(gen_out + "/vectors.txt");
    write_manifest(gen_out + "/corpus", "gen-data",
                   {{"seed", gen_spec.seed},
                    {"per_domain", gen_spec.utterances_per_domain},
                    {"domains", gen_spec.domains},
                    {"out", gen_out}});
    std::cout << "wrote " << corpus.size() << " domains to " << gen_out << "\n";
  });

  // ---- train-base ----
  auto* base = app.add_subcommand("train-base", "train a base model on pooled source domains");
  std::string base_data, base_target, base_out, base_model = "zat";
  std::size_t base_take = 2000;
  std::uint64_t base_seed = 1;
  ModelOpts base_mo;
  TrainOpts base_to;
  base->add_option("--data", base_data, "corpus directory")->required();
  base->add_option("--target", base_target, "held-out target domain")->required();
  base->add_option("--out", base_out, "checkpoint path")->required();
  base->add_option("--model", base_model, "zat or ct")
      ->check(CLI::IsMember({"zat", "ct"}));
  base->add_option("--take", base_take, "train utterances per source domain");
  base->add_option("--seed", base_seed, "training seed");
  base_mo.attach(base);
  base_to.attach(base);
  base->callback([&] {
    auto corpus = load_corpus(base_data);
    JointData joint =
        build_joint_dataset(corpus, base_target, base_take, base_seed, base_to.neg_ratio);
    base_to.cfg.seed = base_seed;
    auto [vocab, emb] = base_mo.embedding_table();
    TrainResult res;
    if (base_model == "zat") {
      ZatModel model = ZatModel::create(base_mo.zat_config(), vocab, emb, base_seed);
      res = run_base_training(model, joint, base_to.cfg);
      save_model(model, base_out);
    } else {
      CtConfig cfg{.word_dim = base_mo.word_dim,
                   .hidden1 = base_mo.ctx_hidden,
                   .combined = base_mo.cond_hidden,
                   .hidden2 = base_mo.cond_hidden};
      CtModel model = CtModel::create(cfg, vocab, emb, base_seed);
      res = run_base_training(model, joint, base_to.cfg);
      save_model(model, base_out);
    }
    write_text(base_out + ".log.tsv", training_log(res));
    write_manifest(base_out, "train-base",
                   {{"data", base_data},
                    {"target", base_target},
                    {"model", base_model},
                    {"take", base_take},
                    {"seed", base_seed},
                    {"model_opts", base_mo.to_json()},
                    {"train_opts", base_to.to_json()}});
    std::cout << "base model saved to " << base_out << " (best dev F1 "
              << fmt(res.best_dev_f1) << ")\n";
  });

  // ---- finetune ----
  auto* ft = app.add_subcommand("finetune", "adapt a base checkpoint to a target domain");
  std::string ft_base, ft_data, ft_target, ft_out;
  std::size_t ft_n = 0;
  std::uint64_t ft_seed = 1;
  TrainOpts ft_to;
  ft->add_option("--base", ft_base, "base checkpoint")->required();
  ft->add_option("--data", ft_data, "corpus directory")->required();
  ft->add_option("--target", ft_target, "target domain")->required();
  ft->add_option("--out", ft_out, "adapted checkpoint path")->required();
  ft->add_option("--n", ft_n, "target train utterances (0 = pure zero-shot)");
  ft->add_option("--seed", ft_seed, "training seed");
  bool ft_weft = false;
  ft->add_flag("--weft", ft_weft, "unfreeze word embeddings during adaptation");
  ft_to.attach(ft);
  ft->callback([&] {
    DomainDataset target = load_domain(ft_data, ft_target);
    ft_to.cfg.seed = ft_seed;
    TrainResult res;
    const std::string kind = checkpoint_kind(ft_base);
    if (kind == "zat") {
      ZatModel model = load_zat(ft_base);
      if (ft_weft) model.cfg.weft = true;
      res = run_fine_tune(model, target, ft_n, ft_to.cfg, ft_to.neg_ratio);
      save_model(model, ft_out);
    } else if (kind == "ct") {
      CtModel model = load_ct(ft_base);
      check(!ft_weft, "--weft applies to the zat model only");
      res = run_fine_tune(model, target, ft_n, ft_to.cfg, ft_to.neg_ratio);
      save_model(model, ft_out);
    } else {
      throw std::runtime_error("finetune expects a zat or ct checkpoint, got " + kind);
    }
    write_text(ft_out + ".log.tsv", training_log(res));
    write_manifest(ft_out, "finetune",
                   {{"base", ft_base},
                    {"data", ft_data},
                    {"target", ft_target},
                    {"n", ft_n},
                    {"seed", ft_seed},
                    {"weft", ft_weft},
                    {"train_opts", ft_to.to_json()}});
    std::cout << "adapted model saved to " << ft_out << "\n";
  });

  // ---- train-baseline ----
  auto* tb = app.add_subcommand("train-baseline",
                                "train a from-scratch baseline on target data");
  std::string tb_kind, tb_data, tb_target, tb_out;
  std::size_t tb_n = 0;
  std::uint64_t tb_seed = 1;
  ModelOpts tb_mo;
  TrainOpts tb_to;
  double tb_keep = 0.8;
  std::size_t tb_char_hidden = 25, tb_word_hidden = 100;
  tb->add_option("--kind", tb_kind, "ct or lstm")
      ->required()
      ->check(CLI::IsMember({"ct", "lstm"}));
  tb->add_option("--data", tb_data, "corpus directory")->required();
  tb->add_option("--target", tb_target, "target domain")->required();
  tb->add_option("--out", tb_out, "checkpoint path")->required();
  tb->add_option("--n", tb_n, "target train utterances (0 = all)");
  tb->add_option("--seed", tb_seed, "training seed");
  tb->add_option("--dropout-keep", tb_keep, "keep probability (lstm baseline)");
  tb->add_option("--char-hidden", tb_char_hidden, "char LSTM units (lstm baseline)");
  tb->add_option("--word-hidden", tb_word_hidden, "word LSTM units (lstm baseline)");
  tb_mo.attach(tb);
  tb_to.attach(tb);
  tb->callback([&] {
    DomainDataset target = load_domain(tb_data, tb_target);
    tb_to.cfg.seed = tb_seed;
    std::vector<Utterance> train = target.train;
    if (tb_n > 0 && tb_n < train.size())
      train = stratified_sample(train, tb_n, Rng(tb_seed ^ fnv1a("target_take")));
    auto [vocab, emb] = tb_mo.embedding_table();
    TrainResult res;
    if (tb_kind == "ct") {
      CtConfig cfg{.word_dim = tb_mo.word_dim,
                   .hidden1 = tb_mo.ctx_hidden,
                   .combined = tb_mo.cond_hidden,
                   .hidden2 = tb_mo.cond_hidden};
      CtModel model = CtModel::create(cfg, vocab, emb, tb_seed);
      Rng ex_rng(tb_seed ^ fnv1a("target_examples"));
      auto examples = build_slot_examples(train, target.catalog, ex_rng, tb_to.neg_ratio);
      res = train_slot_model(model, examples, target.dev, target.catalog, tb_to.cfg);
      save_model(model, tb_out);
    } else {
      LstmTaggerConfig cfg{.word_dim = tb_mo.word_dim,
                           .char_dim = tb_mo.char_dim,
                           .char_hidden = tb_char_hidden,
                           .word_hidden = tb_word_hidden,
                           .dropout_keep = tb_keep};
      std::vector<std::string> slots;
      for (const auto& s : target.catalog) slots.push_back(s.slot_id);
      LstmTagger model = LstmTagger::create(cfg, vocab, slots, emb, tb_seed);
      res = train_utterance_tagger(model, train, target.dev, tb_to.cfg);
      save_model(model, tb_out);
    }
    write_text(tb_out + ".log.tsv", training_log(res));
    write_manifest(tb_out, "train-baseline",
                   {{"kind", tb_kind},
                    {"data", tb_data},
                    {"target", tb_target},
                    {"n", tb_n},
                    {"seed", tb_seed},
                    {"dropout_keep", tb_keep},
                    {"model_opts", tb_mo.to_json()},
                    {"train_opts", tb_to.to_json()}});
    std::cout << "baseline saved to " << tb_out << "\n";
  });

  // ---- eval ----
  auto* ev = app.add_subcommand("eval", "score a checkpoint on a target split");
  std::string ev_model, ev_data, ev_target, ev_out, ev_split = "test", ev_slots;
  std::uint64_t ev_seed = 1;
  ev->add_option("--model", ev_model, "checkpoint")->required();
  ev->add_option("--data", ev_data, "corpus directory")->required();
  ev->add_option("--target", ev_target, "target domain")->required();
  ev->add_option("--out", ev_out, "report path")->required();
  ev->add_option("--split", ev_split, "train, dev, or test")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  ev->add_option("--slots", ev_slots, "comma-separated slot subset");
  ev->add_option("--seed", ev_seed, "merge seed");
  ev->callback([&] {
    DomainDataset target = load_domain(ev_data, ev_target);
    const std::vector<Utterance>& split = ev_split == "train" ? target.train
                                          : ev_split == "dev" ? target.dev
                                                              : target.test;
    auto catalog = restrict_catalog(target.catalog, split_csv(ev_slots));
    auto sp = evaluate_checkpoint(ev_model, split, catalog, ev_seed);
    EvalReport rep = span_f1(sp.gold, sp.pred);
    write_text(ev_out, report_table(rep));
    write_manifest(ev_out, "eval",
                   {{"model", ev_model},
                    {"data", ev_data},
                    {"target", ev_target},
                    {"split", ev_split},
                    {"slots", ev_slots},
                    {"seed", ev_seed}});
    std::cout << report_table(rep);
  });

  // ---- predict ----
  auto* pr = app.add_subcommand("predict", "tag raw utterances, one per line");
  std::string pr_model, pr_data, pr_target, pr_input, pr_out;
  std::uint64_t pr_seed = 1;
  pr->add_option("--model", pr_model, "checkpoint")->required();
  pr->add_option("--data", pr_data, "corpus directory (for the slot catalog)")->required();
  pr->add_option("--target", pr_target, "target domain")->required();
  pr->add_option("--input", pr_input, "token file, whitespace-tokenized lines")->required();
  pr->add_option("--out", pr_out, "span annotations, JSONL")->required();
  pr->add_option("--seed", pr_seed, "merge seed");
  pr->callback([&] {
    DomainDataset target = load_domain(pr_data, pr_target);
    std::ifstream in(pr_input);
    check(in.good(), "cannot open " + pr_input);
    std::string line;
    std::size_t lineno = 0;
    std::string out_text;
    const std::string kind = checkpoint_kind(pr_model);
    ZatModel zm;
    CtModel cm;
    LstmTagger lm;
    if (kind == "zat")
      zm = load_zat(pr_model);
    else if (kind == "ct")
      cm = load_ct(pr_model);
    else
      lm = load_lstm_tagger(pr_model);
    while (std::getline(in, line)) {
      ++lineno;
      Utterance u;
      u.id = "input-" + std::to_string(lineno);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) u.tokens.push_back(tok);
      if (u.tokens.empty()) continue;
      std::vector<SlotSpan> spans;
      if (kind == "zat")
        spans = predict_utterance(zm, u, target.catalog, pr_seed);
      else if (kind == "ct")
        spans = predict_utterance(cm, u, target.catalog, pr_seed);
      else
        spans = lm.predict(u.tokens, u.id);
      json jspans = json::array();
      for (const auto& s : spans) jspans.push_back({s.slot_id, s.start, s.end});
      out_text += json{{"id", u.id}, {"tokens", u.tokens}, {"spans", jspans}}.dump() + "\n";
    }
    write_text(pr_out, out_text);
    write_manifest(pr_out, "predict",
                   {{"model", pr_model},
                    {"data", pr_data},
                    {"target", pr_target},
                    {"input", pr_input},
                    {"seed", pr_seed}});
    std::cout << "wrote predictions to " << pr_out << "\n";
  });

  // ---- ablate ----
  auto* ab = app.add_subcommand("ablate", "compare ZAT against -CRF, -CHAR, and +WEFT");
  std::string ab_data, ab_target, ab_out, ab_seeds = "1,2,3";
  std::size_t ab_take = 2000, ab_n = 50;
  ModelOpts ab_mo;
  TrainOpts ab_to;
  ab->add_option("--data", ab_data, "corpus directory")->required();
  ab->add_option("--target", ab_target, "target domain")->required();
  ab->add_option("--out", ab_out, "comparison table path")->required();
  ab->add_option("--take", ab_take, "train utterances per source domain");
  ab->add_option("--n", ab_n, "target utterances for adaptation");
  ab->add_option("--seeds", ab_seeds, "comma-separated seeds");
  ab_mo.attach(ab);
  ab_to.attach(ab);
  ab->callback([&] {
    auto corpus = load_corpus(ab_data);
    DomainDataset target = load_domain(ab_data, ab_target);
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_csv(ab_seeds)) seeds.push_back(std::stoull(s));
    check(!seeds.empty(), "ablate: no seeds");

    struct Variant {
      std::string label;
      bool no_crf, no_char, weft;
    };
    const std::vector<Variant> variants{{"ZAT", false, false, false},
                                        {"-CRF", true, false, false},
                                        {"-CHAR", false, true, false},
                                        {"+WEFT", false, false, true}};
    std::string table = "variant\tmean_f1";
    for (auto s : seeds) table += "\tseed" + std::to_string(s);
    table += "\n";

    const fs::path workdir = fs::path(ab_out).parent_path() / "ablate_runs";
    fs::create_directories(workdir);
    for (const auto& v : variants) {
      ModelOpts mo = ab_mo;
      mo.no_crf = v.no_crf;
      mo.no_char = v.no_char;
      std::vector<double> f1s;
      for (auto seed : seeds) {
        JointData joint =
            build_joint_dataset(corpus, ab_target, ab_take, seed, ab_to.neg_ratio);
        TrainConfig cfg = ab_to.cfg;
        cfg.seed = seed;
        auto [vocab, emb] = mo.embedding_table();
        ZatModel model = ZatModel::create(mo.zat_config(), vocab, emb, seed);
        run_base_training(model, joint, cfg);
        model.cfg.weft = v.weft;  // embedding fine-tuning kicks in at adaptation
        run_fine_tune(model, target, ab_n, cfg, ab_to.neg_ratio);
        const std::string ckpt =
            (workdir / (v.label + "_" + std::to_string(seed) + ".ckpt")).string();
        save_model(model, ckpt);
        f1s.push_back(test_f1(ckpt, target, seed));
      }
      double mean = 0;
      for (double f : f1s) mean += f;
      mean /= static_cast<double>(f1s.size());
      table += v.label + "\t" + fmt(mean);
      for (double f : f1s) table += "\t" + fmt(f);
      table += "\n";
    }
    write_text(ab_out, table);
    write_manifest(ab_out, "ablate",
                   {{"data", ab_data},
                    {"target", ab_target},
                    {"take", ab_take},
                    {"n", ab_n},
                    {"seeds", ab_seeds},
                    {"model_opts", ab_mo.to_json()},
                    {"train_opts", ab_to.to_json()}});
    std::cout << table;
  });

  // ---- analyze ----
  auto* an = app.add_subcommand("analyze", "error breakdowns by position, length, and POS");
  std::string an_model, an_data, an_target, an_out, an_split = "test";
  std::uint64_t an_seed = 1;
  std::size_t an_min_tag = 1;
  an->add_option("--model", an_model, "checkpoint")->required();
  an->add_option("--data", an_data, "corpus directory")->required();
  an->add_option("--target", an_target, "target domain")->required();
  an->add_option("--out", an_out, "report path prefix")->required();
  an->add_option("--split", an_split, "train, dev, or test")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  an->add_option("--seed", an_seed, "merge seed");
  an->add_option("--min-tag-count", an_min_tag, "drop POS tags rarer than this");
  an->callback([&] {
    DomainDataset target = load_domain(an_data, an_target);
    const std::vector<Utterance>& split = an_split == "train" ? target.train
                                          : an_split == "dev" ? target.dev
                                                              : target.test;
    auto sp = evaluate_checkpoint(an_model, split, target.catalog, an_seed);

    std::string pos_table = "start\terrors\ttotal\terror_rate\n";
    for (const auto& [start, b] : error_by_position(sp.gold, sp.pred))
      pos_table += std::to_string(start) + "\t" + std::to_string(b.total - b.matched) + "\t" +
                   std::to_string(b.total) + "\t" + fmt(1.0 - b.recall()) + "\n";
    write_text(an_out + ".position.tsv", pos_table);

    std::string len_table = "length\terrors\ttotal\terror_rate\n";
    for (const auto& [len, b] : error_by_length(sp.gold, sp.pred))
      len_table += std::to_string(len) + "\t" + std::to_string(b.total - b.matched) + "\t" +
                   std::to_string(b.total) + "\t" + fmt(1.0 - b.recall()) + "\n";
    write_text(an_out + ".length.tsv", len_table);

    std::string tag_table = "pos\terror_tokens\ttotal_tokens\tshare\n";
    for (const auto& [tag, s] : error_by_pos_tag(sp.gold, sp.pred, split, an_min_tag))
      tag_table += tag + "\t" + std::to_string(s.error_tokens) + "\t" +
                   std::to_string(s.total_tokens) + "\t" + fmt(s.share()) + "\n";
    write_text(an_out + ".pos.tsv", tag_table);

    write_manifest(an_out, "analyze",
                   {{"model", an_model},
                    {"data", an_data},
                    {"target", an_target},
                    {"split", an_split},
                    {"seed", an_seed},
                    {"min_tag_count", an_min_tag}});
    std::cout << "wrote " << an_out << ".{position,length,pos}.tsv\n";
  });

  // ---- dump-attention ----
  auto* da = app.add_subcommand("dump-attention", "attention weights for one utterance");
  std::string da_model, da_tokens, da_desc, da_out;
  da->add_option("--model", da_model, "zat checkpoint")->required();
  da->add_option("--tokens", da_tokens, "utterance, whitespace-tokenized")->required();
  da->add_option("--description", da_desc, "slot description words")->required();
  da->add_option("--out", da_out, "matrix file path")->required();
  da->callback([&] {
    ZatModel model = load_zat(da_model);
    std::vector<std::string> tokens, desc;
    std::istringstream ts(da_tokens), ds(da_desc);
    std::string w;
    while (ts >> w) tokens.push_back(w);
    while (ds >> w) desc.push_back(w);
    check(!tokens.empty() && !desc.empty(), "tokens and description must be non-empty");
    Tensor a = model.attention_matrix(tokens, desc);
    std::ostringstream out;
    dump_attention(out, tokens, desc, a);
    write_text(da_out, out.str());
    write_manifest(da_out, "dump-attention",
                   {{"model", da_model}, {"tokens", da_tokens}, {"description", da_desc}});
    std::cout << out.str();
  });

  // ---- sweep ----
  auto* sw = app.add_subcommand("sweep", "learning curve over target sizes and seeds");
  std::string sw_base, sw_data, sw_target, sw_out, sw_sizes = "0,50,100", sw_seeds = "1,2,3";
  TrainOpts sw_to;
  sw->add_option("--base", sw_base, "base checkpoint")->required();
  sw->add_option("--data", sw_data, "corpus directory")->required();
  sw->add_option("--target", sw_target, "target domain")->required();
  sw->add_option("--out", sw_out, "curve table path")->required();
  sw->add_option("--sizes", sw_sizes, "comma-separated target sizes");
  sw->add_option("--seeds", sw_seeds, "comma-separated seeds");
  sw_to.attach(sw);
  sw->callback([&] {
    DomainDataset target = load_domain(sw_data, sw_target);
    std::vector<std::size_t> sizes;
    for (const auto& s : split_csv(sw_sizes)) sizes.push_back(std::stoull(s));
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_csv(sw_seeds)) seeds.push_back(std::stoull(s));
    check(!sizes.empty() && !seeds.empty(), "sweep: empty sizes or seeds");
    check(checkpoint_kind(sw_base) == "zat" || checkpoint_kind(sw_base) == "ct",
          "sweep expects a zat or ct base checkpoint");

    const fs::path workdir = fs::path(sw_out).parent_path() / "sweep_runs";
    fs::create_directories(workdir);
    std::string runs = "n\tseed\tf1\n";
    std::string summary = "n\tmean_f1\tstdev\n";
    for (std::size_t n : sizes) {
      std::vector<double> f1s;
      for (auto seed : seeds) {
        TrainConfig cfg = sw_to.cfg;
        cfg.seed = seed;
        const std::string ckpt =
            (workdir / ("n" + std::to_string(n) + "_s" + std::to_string(seed) + ".ckpt"))
                .string();
        if (checkpoint_kind(sw_base) == "zat") {
          ZatModel model = load_zat(sw_base);
          run_fine_tune(model, target, n, cfg, sw_to.neg_ratio);
          save_model(model, ckpt);
        } else {
          CtModel model = load_ct(sw_base);
          run_fine_tune(model, target, n, cfg, sw_to.neg_ratio);
          save_model(model, ckpt);
        }
        const double f1 = test_f1(ckpt, target, seed);
        f1s.push_back(f1);
        runs += std::to_string(n) + "\t" + std::to_string(seed) + "\t" + fmt(f1) + "\n";
      }
      double mean = 0;
      for (double f : f1s) mean += f;
      mean /= static_cast<double>(f1s.size());
      double var = 0;
      for (double f : f1s) var += (f - mean) * (f - mean);
      var /= static_cast<double>(f1s.size());
      summary += std::to_string(n) + "\t" + fmt(mean) + "\t" + fmt(std::sqrt(var)) + "\n";
    }
    write_text(sw_out, runs);
    write_text(sw_out + ".summary.tsv", summary);
    write_manifest(sw_out, "sweep",
                   {{"base", sw_base},
                    {"data", sw_data},
                    {"target", sw_target},
                    {"sizes", sw_sizes},
                    {"seeds", sw_seeds},
                    {"train_opts", sw_to.to_json()}});
    std::cout << summary;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
