#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "phonecap/metrics.hpp"

using namespace phonecap;
using namespace phonecap::metrics;
using fixtures::split;

namespace {

std::vector<PhonemeSequence> refs(std::initializer_list<const char*> texts) {
  std::vector<PhonemeSequence> out;
  for (const char* t : texts) out.push_back(split(t));
  return out;
}

}  // namespace

TEST_SUITE("bleu") {

TEST_CASE("clipped counts") {
  const auto cand = split("X X X X X X X");
  auto c = modified_precision(cand, refs({"A X B X C D"}), 1);
  CHECK(c.matches == 2);
  CHECK(c.total == 7);

  const auto same = split("A B C D E");
  for (int n = 1; n <= 5; ++n) {
    auto s = modified_precision(same, refs({"A B C D E"}), n);
    CHECK(s.matches == 6 - n);
    CHECK(s.total == 6 - n);
  }
  auto none = modified_precision(split("A B C"), refs({"A B C"}), 4);
  CHECK(none.matches == 0);
  CHECK(none.total == 0);
}

TEST_CASE("clipping takes the max over references") {
  auto c = modified_precision(split("A A A"), refs({"A B", "A A C"}), 1);
  CHECK(c.matches == 2);
}

TEST_CASE("brevity penalty") {
  const std::vector<std::size_t> ten{10};
  CHECK(brevity_penalty(10, ten) == 1.0);
  CHECK(brevity_penalty(5, ten) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(brevity_penalty(5, ten) == doctest::Approx(0.3679).epsilon(1e-4));
  const std::vector<std::size_t> tie{6, 8};
  CHECK(closest_reference_length(7, tie) == 6);
  CHECK(brevity_penalty(7, tie) == 1.0);
  const std::vector<std::size_t> tie_rev{8, 6};
  CHECK(closest_reference_length(7, tie_rev) == 6);
  CHECK_THROWS(brevity_penalty(0, ten));
}

TEST_CASE("corpus bleu identity and disjoint") {
  std::vector<EvalPair> pairs{{"a", split("A B C D E F"), refs({"A B C D E F", "F E D C B A"})},
                              {"b", split("B C D E F G"), refs({"X Y Z W V U", "B C D E F G"})}};
  for (int n = 1; n <= 6; ++n) CHECK(bleu_corpus(pairs, n).value == doctest::Approx(100.0).epsilon(1e-12));

  std::vector<EvalPair> disjoint{{"a", split("A B C"), refs({"D E F"})}};
  CHECK(bleu_corpus(disjoint, 4).value == 0.0);
  CHECK_THROWS(bleu_corpus(pairs, 0));
  CHECK_THROWS(bleu_corpus(pairs, 9));
  CHECK(bleu_corpus(pairs, 4).metric == "BLEU4");
}

TEST_CASE("corpus bleu matches the oracle on 20 pairs") {
  fixtures::Rng rng(11);
  auto pairs = fixtures::random_pairs(rng, 20, 6, 3, 15);
  for (int n = 1; n <= 8; ++n) {
    CHECK(bleu_corpus(pairs, n).value == doctest::Approx(oracle::corpus_bleu(pairs, n)).epsilon(1e-12));
  }
}

TEST_CASE("sentence bleu") {
  const auto cand = split("A B C D E");
  CHECK(bleu_sentence(cand, refs({"A B C D E"}), 4) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bleu_sentence(cand, refs({"F G H I J"}), 4, 1e-9) < 1e-5);
  CHECK(bleu_sentence(split(""), refs({"A"}), 4) == 0.0);
  // short candidate: order 3 and 4 have no n-grams and take epsilon directly
  const double eps = 0.1;
  const double expected = 100.0 * std::exp((std::log(1.0) + std::log(1.0) + std::log(eps) + std::log(eps)) / 4);
  CHECK(bleu_sentence(split("A B"), refs({"A B"}), 4, eps) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("per-pair average") {
  EvalPair one{"a", split("A B C D"), refs({"A B D C"})};
  std::vector<EvalPair> pairs{one};
  CHECK(bleu_per_pair_average(pairs, 2).value ==
        doctest::Approx(bleu_sentence(one.candidate, one.references, 2)).epsilon(1e-15));

  EvalPair two{"a", split("A B C D"), refs({"A B C D", "D C B A"})};
  std::vector<EvalPair> p2{two};
  const double b = bleu_sentence(two.candidate, refs({"D C B A"}), 2);
  CHECK(bleu_per_pair_average(p2, 2).value == doctest::Approx((100.0 + b) / 2).epsilon(1e-12));
  CHECK(bleu_per_pair_average(p2, 2).per_caption.at("a") == doctest::Approx((100.0 + b) / 2).epsilon(1e-12));
}

}

TEST_SUITE("edit") {

TEST_CASE("per") {
  CHECK(per(split("M AE N"), split("M AE N")) == 0.0);
  CHECK(per(split("M AE N"), split("M EH N")) == doctest::Approx(100.0 / 3).epsilon(1e-12));
  CHECK(per(split("A B C D"), split("A")) == doctest::Approx(300.0));
  CHECK(edit_distance(split("K IH T AH N"), split("S IH T IH NG")) == 3);
  CHECK_THROWS(per(split("A"), split("")));
}

TEST_CASE("per aggregation") {
  std::vector<EvalPair> single{{"a", split("A B"), refs({"A C"})}, {"b", split("C"), refs({"C D"})}};
  CHECK(per_aggregate(single, PerMode::best_reference).value ==
        per_aggregate(single, PerMode::per_pair_average).value);

  std::vector<EvalPair> three{{"a", split("A B C"), refs({"X", "A B C", "A"})}};
  CHECK(per_aggregate(three, PerMode::best_reference).per_caption.at("a") == 0.0);

  fixtures::Rng rng(3);
  auto pairs = fixtures::random_pairs(rng, 10, 5, 1, 12);
  CHECK(per_aggregate(pairs, PerMode::best_reference).value == doctest::Approx(oracle::per_best(pairs)).epsilon(1e-12));
  CHECK(per_aggregate(pairs, PerMode::per_pair_average).value == doctest::Approx(oracle::per_average(pairs)).epsilon(1e-12));
}

TEST_CASE("lcs and rouge-l") {
  const auto a = split("B D C A B A");
  const auto b = split("A B C B D A B");
  CHECK(lcs_length(a, b) == 4);
  CHECK(oracle::lcs(a, b) == 4);
  CHECK(lcs_length(split("A B"), split("C D")) == 0);

  // R = 4/7, P = 4/6
  const double r = 4.0 / 7, p = 4.0 / 6, b2 = 1.44;
  const double f = (1 + b2) * p * r / (r + b2 * p);
  CHECK(rouge_l(a, std::vector<PhonemeSequence>{b}) == doctest::Approx(100 * f).epsilon(1e-12));
  CHECK(rouge_l(a, std::vector<PhonemeSequence>{b}) == doctest::Approx(60.6965).epsilon(1e-6));
  CHECK(rouge_l(a, refs({"X", "B D C A B A"})) == doctest::Approx(100.0));
  CHECK(rouge_l(a, refs({"X Y"})) == 0.0);
}

}

TEST_SUITE("meteor") {

TEST_CASE("closed forms") {
  CHECK(meteor(split("A B C"), refs({"D E F"})).score == 0.0);
  const auto m3 = meteor(split("A B C"), refs({"A B C"}));
  CHECK(m3.score == doctest::Approx(100 * (1 - 0.5 / 27)).epsilon(1e-12));
  CHECK(m3.score == doctest::Approx(98.148).epsilon(1e-5));
  CHECK_FALSE(m3.heuristic);
  CHECK(meteor(split("D C B A"), refs({"A B C D"})).score == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("alignment prefers fewer chunks") {
  // A can pair with either A in the reference; only one choice keeps A B together.
  auto a = align_exact(split("A B"), split("A X A B"));
  CHECK(a.matches == 2);
  CHECK(a.chunks == 1);
  CHECK(count_maximum_matchings(split("A B"), split("A X A B")) == 2.0);
  CHECK(count_maximum_matchings(split("A A B"), split("A A A")) == 6.0);
}

TEST_CASE("heuristic kicks in above the limit") {
  auto cand = split("A A A A A A A A A A");
  auto ref = split("A A A A A A A A A A");
  CHECK(count_maximum_matchings(cand, ref) == 3628800.0);
  auto a = align_exact(cand, ref);
  CHECK(a.heuristic);
  CHECK(a.matches == 10);
  CHECK(a.chunks == 1);
  CHECK_FALSE(align_exact(cand, ref, 1e7).heuristic);
}

TEST_CASE("oracle on random pairs") {
  fixtures::Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    auto cand = rng.sequence(1, 10, 4);
    auto ref = rng.sequence(1, 10, 4);
    const auto a = align_exact(cand, ref);
    const auto o = oracle::meteor_align(cand, ref);
    CHECK(static_cast<int>(a.matches) == o.matches);
    CHECK(count_maximum_matchings(cand, ref) == static_cast<double>(o.matchings));
    if (!a.heuristic) CHECK(static_cast<int>(a.chunks) == o.chunks);
  }
}

TEST_CASE("params") {
  MeteorParams p;
  p.penalty_gamma = 1.5;
  CHECK_THROWS(p.validate());
  p = {};
  p.recall_weight = -1;
  CHECK_THROWS(p.validate());
}

}

TEST_SUITE("cider") {

TEST_CASE("degenerate corpus") {
  std::vector<EvalPair> one{{"a", split("A B"), refs({"A B"})}};
  CHECK(cider(one).value == 0.0);
}

TEST_CASE("disjoint vocabularies") {
  std::vector<EvalPair> two{{"a", split("A B C D E"), refs({"A B C D E"})},
                            {"b", split("F G H I J"), refs({"F G H I J"})}};
  auto s = cider(two);
  CHECK(s.value == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(s.per_caption.at("b") == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("oracle on 10 images") {
  fixtures::Rng rng(8);
  auto pairs = fixtures::random_pairs(rng, 10, 5, 2, 12);
  CHECK(cider(pairs).value == doctest::Approx(oracle::cider(pairs)).epsilon(1e-12));
  CHECK_THROWS(cider(std::vector<EvalPair>{}));
}

}
