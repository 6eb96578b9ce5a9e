#include <catch2/catch_amalgamated.hpp>

#include "zat/core/gradcheck.hpp"
#include "zat/model/baselines.hpp"

using namespace zat;

namespace {

Vocabulary small_vocab() {
  Vocabulary v;
  for (const char* w : {"find", "deals", "in", "seattle", "location", "city", "date", "time"})
    v.add(w);
  return v;
}

}  // namespace

TEST_CASE("concept tagger forward shapes and decode validity") {
  CtConfig cfg{.word_dim = 8, .hidden1 = 5, .combined = 4, .hidden2 = 4};
  Vocabulary vocab = small_vocab();
  Rng rng(1);
  CtModel m = CtModel::create(cfg, vocab, xavier_uniform_init({vocab.size(), 8}, rng), 7);

  const std::vector<std::string> tokens{"find", "deals", "in", "seattle"};
  const std::vector<std::string> desc{"location", "city"};

  Tape tape;
  CtModel::Graph g = m.graph(tape);
  auto u = m.forward(tape, g, tokens, desc);
  REQUIRE(u.size() == tokens.size());
  for (NodeId n : u) REQUIRE(tape.value(n).numel() == kNumTags);

  TagSequence pred = m.predict(tokens, desc);
  REQUIRE(pred.size() == tokens.size());
  REQUIRE(is_valid_bio(pred));

  REQUIRE_THROWS(m.forward(tape, g, {}, desc));
  REQUIRE_THROWS(m.forward(tape, g, tokens, {}));
  REQUIRE(m.trainable().size() == m.params.names().size() - 1);  // word_emb frozen
}

TEST_CASE("concept tagger slot encoding is the description average") {
  // With the first LSTM zeroed, the combiner input is [0; avg(q)]; two
  // descriptions with the same average produce identical emissions.
  CtConfig cfg{.word_dim = 8, .hidden1 = 3, .combined = 3, .hidden2 = 3};
  Vocabulary vocab = small_vocab();
  Rng rng(2);
  CtModel m = CtModel::create(cfg, vocab, xavier_uniform_init({vocab.size(), 8}, rng), 9);
  for (const char* n : {"lstm1.fwd.w", "lstm1.fwd.b", "lstm1.bwd.w", "lstm1.bwd.b"})
    for (auto& v : m.params[n].data) v = 0;

  auto emissions = [&](const std::vector<std::string>& desc) {
    Tape tape;
    CtModel::Graph g = m.graph(tape);
    auto u = m.forward(tape, g, {"find", "deals"}, desc);
    std::vector<double> flat;
    for (NodeId n : u)
      for (double v : tape.value(n).data) flat.push_back(v);
    return flat;
  };

  auto a = emissions({"location", "city"});
  auto b = emissions({"city", "location"});  // same multiset, same average
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Catch::Approx(b[i]).margin(1e-12));

  auto c = emissions({"location", "date"});
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::fabs(a[i] - c[i]) > 1e-9) differs = true;
  CHECK(differs);
}

TEST_CASE("concept tagger gradient check at tiny dims") {
  CtConfig cfg{.word_dim = 6, .hidden1 = 4, .combined = 3, .hidden2 = 3};
  Vocabulary vocab = small_vocab();
  Rng rng(3);
  CtModel model = CtModel::create(cfg, vocab, xavier_uniform_init({vocab.size(), 6}, rng), 11);

  const std::vector<std::string> tokens{"find", "deals", "in"};
  const std::vector<std::string> desc{"location", "city"};
  const TagSequence gold{kTagO, kTagB, kTagI};

  auto loss = [&](const ParamSet& ps, ParamSet* grads) {
    CtModel m = model;
    m.params = ps;
    Tape tape;
    CtModel::Graph g = m.graph(tape);
    NodeId l = m.example_loss(tape, g, tokens, desc, gold);
    tape.backward(l);
    if (grads)
      for (const auto& [name, node] : g.leaves) (*grads)[name] = tape.grad(node);
    return tape.value(l).data[0];
  };
  CHECK(grad_check(loss, model.params) < 1e-4);
}

TEST_CASE("lstm tagger tagset layout and gold encoding") {
  LstmTaggerConfig cfg{.word_dim = 6, .char_dim = 4, .char_hidden = 3, .word_hidden = 4};
  Vocabulary vocab = small_vocab();
  Rng rng(4);
  LstmTagger m = LstmTagger::create(cfg, vocab, {"location", "date"},
                                    xavier_uniform_init({vocab.size(), 6}, rng), 13);

  REQUIRE(m.num_tags() == 5);
  REQUIRE(m.b_tag(0) == 1);
  REQUIRE(m.i_tag(0) == 2);
  REQUIRE(m.b_tag(1) == 3);
  REQUIRE(m.i_tag(1) == 4);
  REQUIRE_THROWS(m.slot_index("nope"));

  Utterance u;
  u.id = "u";
  u.domain = "d";
  u.intent = "i";
  u.tokens = {"find", "deals", "in", "seattle", "date"};
  u.spans = {{"location", 3, 4, "u"}, {"date", 0, 2, "u"}};
  u.validate();
  REQUIRE(m.full_tags(u) == TagSequence{3, 4, 0, 1, 0});

  Utterance bad = u;
  bad.spans = {{"time", 0, 1, "u"}};
  REQUIRE_THROWS(m.full_tags(bad));
}

TEST_CASE("lstm tagger predictions are disjoint in-bounds spans") {
  LstmTaggerConfig cfg{.word_dim = 6, .char_dim = 4, .char_hidden = 3, .word_hidden = 4};
  Vocabulary vocab = small_vocab();
  Rng rng(5);
  LstmTagger m = LstmTagger::create(cfg, vocab, {"location", "date", "time"},
                                    xavier_uniform_init({vocab.size(), 6}, rng), 17);

  const std::vector<std::string> tokens{"find", "deals", "in", "seattle", "city", "time"};
  auto spans = m.predict(tokens, "u9");
  for (std::size_t i = 0; i < spans.size(); ++i) {
    REQUIRE(spans[i].start < spans[i].end);
    REQUIRE(spans[i].end <= tokens.size());
    REQUIRE(spans[i].utterance_id == "u9");
    for (std::size_t j = i + 1; j < spans.size(); ++j)
      REQUIRE(!spans[i].overlaps(spans[j]));
  }
}

TEST_CASE("lstm tagger gradient check at tiny dims") {
  LstmTaggerConfig cfg{
      .word_dim = 5, .char_dim = 3, .char_hidden = 3, .word_hidden = 3, .dropout_keep = 1.0};
  Vocabulary vocab = small_vocab();
  Rng rng(6);
  LstmTagger model = LstmTagger::create(cfg, vocab, {"location", "date"},
                                        xavier_uniform_init({vocab.size(), 5}, rng), 19);

  const std::vector<std::string> tokens{"find", "seattle", "date"};
  const TagSequence gold{0, 1, 3};  // O B-location B-date

  auto loss = [&](const ParamSet& ps, ParamSet* grads) {
    LstmTagger m = model;
    m.params = ps;
    Tape tape;
    LstmTagger::Graph g = m.graph(tape);
    NodeId l = m.example_loss(tape, g, tokens, gold);
    tape.backward(l);
    if (grads)
      for (const auto& [name, node] : g.leaves) (*grads)[name] = tape.grad(node);
    return tape.value(l).data[0];
  };
  CHECK(grad_check(loss, model.params) < 1e-4);
}

TEST_CASE("lstm tagger dropout is identity at inference and stochastic in training") {
  LstmTaggerConfig cfg{
      .word_dim = 5, .char_dim = 3, .char_hidden = 3, .word_hidden = 3, .dropout_keep = 0.5};
  Vocabulary vocab = small_vocab();
  Rng rng(7);
  LstmTagger m = LstmTagger::create(cfg, vocab, {"location"},
                                    xavier_uniform_init({vocab.size(), 5}, rng), 23);
  const std::vector<std::string> tokens{"find", "seattle"};

  auto run = [&](Rng* drop) {
    Tape tape;
    LstmTagger::Graph g = m.graph(tape);
    auto u = m.forward(tape, g, tokens, drop);
    std::vector<double> flat;
    for (NodeId n : u)
      for (double v : tape.value(n).data) flat.push_back(v);
    return flat;
  };

  // inference path deterministic
  REQUIRE(run(nullptr) == run(nullptr));
  // training path differs from inference for some seed
  Rng d1(1), d2(2);
  auto a = run(&d1), b = run(&d2), base = run(nullptr);
  CHECK((a != base || b != base));
}
