#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "zat/core/gradcheck.hpp"
#include "zat/core/optim.hpp"
#include "zat/model/crf.hpp"

using namespace zat;

namespace {

Tensor random_emissions(std::size_t T, Rng& rng) {
  Tensor u({kNumTags, T});
  for (double& v : u.data) v = rng.uniform(-2, 2);
  return u;
}

CrfParams random_crf(Rng& rng, bool mask = false) {
  CrfParams crf;
  for (double& v : crf.trans.data) v = rng.uniform(-1, 1);
  for (double& v : crf.start.data) v = rng.uniform(-1, 1);
  for (double& v : crf.end.data) v = rng.uniform(-1, 1);
  if (mask) {
    crf.trans.at(kTagO, kTagI) = kNegInf;
    crf.start.data[kTagI] = kNegInf;
  }
  return crf;
}

}  // namespace

TEST_CASE("sequence_score") {
  SECTION("T=1 single emission") {
    Tensor u({3, 1});
    u.at(kTagO, 0) = 2.0;
    CrfParams crf;
    CHECK(sequence_score(u, crf, {kTagO}) == Catch::Approx(2.0));
  }
  SECTION("all-zero scores give 0 for every sequence") {
    Tensor u({3, 2});
    CrfParams crf;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) CHECK(sequence_score(u, crf, {a, b}) == 0.0);
  }
  SECTION("random T=4 instance equals term-by-term recomputation") {
    Rng rng(21);
    Tensor u = random_emissions(4, rng);
    CrfParams crf = random_crf(rng);
    TagSequence y{kTagB, kTagI, kTagO, kTagB};
    double expected = crf.start.data[y[0]] + u.at(y[0], 0);
    expected += crf.trans.at(y[0], y[1]) + u.at(y[1], 1);
    expected += crf.trans.at(y[1], y[2]) + u.at(y[2], 2);
    expected += crf.trans.at(y[2], y[3]) + u.at(y[3], 3);
    expected += crf.end.data[y[3]];
    CHECK(sequence_score(u, crf, y) == Catch::Approx(expected).margin(1e-12));
  }
  SECTION("length mismatch rejected") {
    Tensor u({3, 2});
    CHECK_THROWS(sequence_score(u, CrfParams{}, {kTagO}));
  }
}

TEST_CASE("log_partition") {
  CrfParams zero;
  SECTION("T=1, all zeros -> ln 3") {
    CHECK(log_partition(Tensor({3, 1}), zero) == Catch::Approx(std::log(3.0)));
  }
  SECTION("T=2, all zeros -> ln 9") {
    CHECK(log_partition(Tensor({3, 2}), zero) == Catch::Approx(std::log(9.0)));
  }
  SECTION("matches brute force on random instances, T <= 6") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t T = 1 + rng.uniform_int(6);
      Tensor u = random_emissions(T, rng);
      CrfParams crf = random_crf(rng, trial % 2 == 0);
      CHECK(std::fabs(log_partition(u, crf) - brute_force_logZ(u, crf)) < 1e-8);
    }
  }
  SECTION("partition dominates every single path") {
    Rng rng(8);
    Tensor u = random_emissions(4, rng);
    CrfParams crf = random_crf(rng);
    const double lz = log_partition(u, crf);
    auto [best, score] = brute_force_decode(u, crf);
    CHECK(lz >= score);
  }
}

TEST_CASE("viterbi_decode") {
  SECTION("one-hot emissions recover the peaked sequence") {
    Tensor u({3, 3});
    u.at(kTagB, 0) = 10;
    u.at(kTagI, 1) = 10;
    u.at(kTagO, 2) = 10;
    auto [y, s] = viterbi_decode(u, CrfParams{});
    CHECK(y == TagSequence{kTagB, kTagI, kTagO});
    CHECK(s == Catch::Approx(30.0));
  }
  SECTION("all-zero scores break ties toward B") {
    auto [y, s] = viterbi_decode(Tensor({3, 4}), CrfParams{});
    CHECK(y == TagSequence{kTagB, kTagB, kTagB, kTagB});
    CHECK(s == 0.0);
  }
  SECTION("matches brute force max on random instances") {
    Rng rng(13);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t T = 1 + rng.uniform_int(6);
      Tensor u = random_emissions(T, rng);
      CrfParams crf = random_crf(rng, trial % 3 == 0);
      auto [y, s] = viterbi_decode(u, crf);
      auto [by, bs] = brute_force_decode(u, crf);
      CHECK(std::fabs(s - bs) < 1e-9);
      CHECK(sequence_score(u, crf, y) == Catch::Approx(bs).margin(1e-9));
    }
  }
  SECTION("structural mask keeps every decode valid") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t T = 1 + rng.uniform_int(8);
      Tensor u = random_emissions(T, rng);
      CrfParams crf = random_crf(rng, true);
      CHECK(is_valid_bio(viterbi_decode(u, crf).first));
    }
  }
}

TEST_CASE("crf_nll on the tape") {
  auto nll_value = [](const Tensor& u, const CrfParams& crf, const TagSequence& gold) {
    Tape tape;
    std::vector<NodeId> cols;
    for (std::size_t t = 0; t < u.shape[1]; ++t) {
      Tensor c({kNumTags});
      for (std::size_t j = 0; j < kNumTags; ++j) c.data[j] = u.at(j, t);
      cols.push_back(tape.leaf(c));
    }
    CrfNodes nodes{tape.leaf(crf.trans), tape.leaf(crf.start), tape.leaf(crf.end)};
    return tape.value(crf_nll(tape, cols, nodes, gold)).data[0];
  };

  SECTION("strongly peaked emissions drive the loss to zero") {
    Tensor u({3, 3});
    TagSequence gold{kTagB, kTagI, kTagO};
    for (std::size_t t = 0; t < 3; ++t) u.at(gold[t], t) = 100.0;
    CHECK(nll_value(u, CrfParams{}, gold) < 1e-6);
  }
  SECTION("all-zero scores, T=1 -> ln 3 for any gold") {
    CHECK(nll_value(Tensor({3, 1}), CrfParams{}, {kTagO}) == Catch::Approx(std::log(3.0)));
    CHECK(nll_value(Tensor({3, 1}), CrfParams{}, {kTagB}) == Catch::Approx(std::log(3.0)));
  }
  SECTION("invalid gold rejected") {
    CHECK_THROWS(nll_value(Tensor({3, 2}), CrfParams{}, {kTagO, kTagI}));
    CHECK_THROWS(nll_value(Tensor({3, 1}), CrfParams{}, {kTagI}));
  }
  SECTION("nll is nonnegative and matches plain logZ - score") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t T = 1 + rng.uniform_int(5);
      Tensor u = random_emissions(T, rng);
      CrfParams crf = random_crf(rng);
      TagSequence gold(T, kTagO);
      gold[0] = kTagB;
      const double v = nll_value(u, crf, gold);
      CHECK(v >= -1e-9);
      CHECK(v == Catch::Approx(log_partition(u, crf) - sequence_score(u, crf, gold)).margin(1e-9));
    }
  }
  SECTION("gradient w.r.t. U matches finite differences (marginals - gold)") {
    Rng rng(77);
    ParamSet p;
    p.add("u", random_emissions(4, rng));
    TagSequence gold{kTagB, kTagI, kTagO, kTagB};
    CrfParams crf = random_crf(rng);
    auto loss = [&](const ParamSet& ps, ParamSet* g) {
      Tape tape;
      NodeId u = tape.leaf(ps["u"]);
      std::vector<NodeId> cols;
      for (std::size_t t = 0; t < 4; ++t) cols.push_back(tape.col(u, t));
      CrfNodes nodes{tape.leaf(crf.trans), tape.leaf(crf.start), tape.leaf(crf.end)};
      NodeId l = crf_nll(tape, cols, nodes, gold);
      tape.backward(l);
      if (g) (*g)["u"] = tape.grad(u);
      return tape.value(l).data[0];
    };
    CHECK(grad_check(loss, p) < 1e-5);
  }
}

TEST_CASE("gradient of log_partition gives per-position marginals") {
  Rng rng(55);
  Tensor u = random_emissions(5, rng);
  CrfParams crf = random_crf(rng, true);
  Tape tape;
  NodeId un = tape.leaf(u);
  std::vector<NodeId> cols;
  for (std::size_t t = 0; t < 5; ++t) cols.push_back(tape.col(un, t));
  CrfNodes nodes{tape.leaf(crf.trans), tape.leaf(crf.start), tape.leaf(crf.end)};
  tape.backward(crf_log_partition(tape, cols, nodes));
  const Tensor& marg = tape.grad(un);
  for (std::size_t t = 0; t < 5; ++t) {
    double colsum = 0;
    for (std::size_t j = 0; j < kNumTags; ++j) {
      CHECK(marg.at(j, t) >= -1e-12);
      colsum += marg.at(j, t);
    }
    CHECK(colsum == Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("adding a constant to U shifts scores by c*T and leaves nll invariant") {
  Rng rng(61);
  const std::size_t T = 5;
  Tensor u = random_emissions(T, rng);
  CrfParams crf = random_crf(rng);
  const double c = 0.73;
  Tensor u2 = u;
  for (double& v : u2.data) v += c;
  TagSequence gold{kTagB, kTagI, kTagI, kTagO, kTagB};
  CHECK(log_partition(u2, crf) == Catch::Approx(log_partition(u, crf) + c * T).margin(1e-9));
  CHECK(sequence_score(u2, crf, gold) ==
        Catch::Approx(sequence_score(u, crf, gold) + c * T).margin(1e-9));
  CHECK(viterbi_decode(u2, crf).first == viterbi_decode(u, crf).first);
}

TEST_CASE("brute force guards against 3^T blowup") {
  Tensor u({3, 12});
  CHECK_THROWS(brute_force_decode(u, CrfParams{}));
  CHECK_THROWS(brute_force_logZ(u, CrfParams{}));
}

TEST_CASE("greedy_decode repairs orphan I tags") {
  Tensor u({3, 3});
  u.at(kTagI, 0) = 5;  // would start with I
  u.at(kTagI, 1) = 5;
  u.at(kTagO, 2) = 5;
  TagSequence y = greedy_decode(u);
  CHECK(y == TagSequence{kTagB, kTagI, kTagO});
  CHECK(is_valid_bio(y));
}
