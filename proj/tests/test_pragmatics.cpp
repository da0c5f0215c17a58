#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "zsrg/pragmatics.hpp"

using namespace zsrg;

namespace {

// The three-category, two-word game: "left" is category-neutral at 1/2,
// "bus" concentrates on the first category (9/10, 1/10, 1/10).
WordCategoryTable worked_example_table() {
  return WordCategoryTable::from_probs(
      {"bus", "left"}, {"c1", "c2", "c3"},
      {{0.9, 0.5}, {0.1, 0.5}, {0.1, 0.5}});
}

Referent dummy_ref(const CategoryId& c) {
  Referent r;
  r.id = "x";
  r.category = c;
  return r;
}

}  // namespace

TEST_CASE("make_category_belief") {
  const std::vector<CategoryId> inv{"c1", "c2", "c3"};
  SUBCASE("uniform gives one third each") {
    const auto b = make_category_belief(BeliefMode::kUniform, dummy_ref("c1"), inv);
    for (double p : b.probs()) CHECK(p == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("oracle is one-hot on the referent's category") {
    const auto b = make_category_belief(BeliefMode::kOracle, dummy_ref("c2"), inv);
    CHECK(b.probs() == std::vector<double>{0.0, 1.0, 0.0});
  }
  SUBCASE("an unnormalized custom distribution is rejected") {
    CHECK_THROWS_WITH_AS(
        make_category_belief(BeliefMode::kCustom, dummy_ref("c1"), inv,
                             std::vector<double>{0.9, 0.1, 0.1}),
        doctest::Contains("sum"), Error);
  }
  SUBCASE("custom is required iff mode is custom") {
    CHECK_THROWS_AS(
        make_category_belief(BeliefMode::kUniform, dummy_ref("c1"), inv,
                             std::vector<double>{1.0, 0.0, 0.0}),
        Error);
    CHECK_THROWS_AS(
        make_category_belief(BeliefMode::kCustom, dummy_ref("c1"), inv), Error);
  }
  SUBCASE("negative entries are rejected") {
    CHECK_THROWS_AS(CategoryBelief::custom({"a", "b"}, {1.5, -0.5}), Error);
  }
}

TEST_CASE("word_listener_score reproduces the worked example") {
  const auto table = worked_example_table();

  SUBCASE("uncertain listener prefers the unspecific word") {
    const auto uniform = CategoryBelief::uniform(table.categories());
    CHECK(word_listener_score(table, uniform, "left") ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(word_listener_score(table, uniform, "bus") ==
          doctest::Approx(11.0 / 30.0).epsilon(1e-12));
  }
  SUBCASE("a certain listener prefers the specific word") {
    // the raw (unnormalized) weights reproduce the reported 0.83 and 0.55
    const auto certain = CategoryBelief::from_raw_weights_unchecked(
        table.categories(), {0.9, 0.1, 0.1});
    CHECK(word_listener_score(table, certain, "bus") ==
          doctest::Approx(0.83).epsilon(1e-12));
    CHECK(word_listener_score(table, certain, "left") ==
          doctest::Approx(0.55).epsilon(1e-12));
  }
  SUBCASE("a one-hot belief collapses to the table row") {
    const auto oracle = CategoryBelief::one_hot(table.categories(), "c1");
    CHECK(word_listener_score(table, oracle, "bus") == doctest::Approx(0.9));
  }
}

TEST_CASE("listener score properties on random tables") {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    SplitMix64 rng(derive_seed(31, "wls" + std::to_string(i)));
    const auto corpus = testing::random_corpus(rng);
    const auto table = WordCategoryTable::estimate(corpus, 0.1);
    const auto cats = table.categories();
    const Token w = corpus.vocabulary()[rng.next_below(corpus.vocabulary().size())];

    // one-hot collapse
    const auto& pick = cats[rng.next_below(cats.size())];
    const auto oracle_belief = CategoryBelief::one_hot(cats, pick);
    REQUIRE(std::abs(word_listener_score(table, oracle_belief, w) -
                     table.prob(w, pick)) < 1e-12);

    // uniform-mean
    const auto uniform = CategoryBelief::uniform(cats);
    double mean = 0.0, maxp = 0.0;
    for (const auto& c : cats) {
      mean += table.prob(w, c);
      maxp = std::max(maxp, table.prob(w, c));
    }
    mean /= static_cast<double>(cats.size());
    const double uniform_score = word_listener_score(table, uniform, w);
    REQUIRE(uniform_score == doctest::Approx(mean).epsilon(1e-12));

    // range and demotion: uniform score never exceeds the best row, and is
    // strictly below it whenever the word is not category-neutral
    REQUIRE(uniform_score > 0.0);
    REQUIRE(uniform_score <= 1.0 + 1e-12);
    REQUIRE(uniform_score <= maxp + 1e-15);
    double minp = 1.0;
    for (const auto& c : cats) minp = std::min(minp, table.prob(w, c));
    if (maxp - minp > 1e-9) REQUIRE(uniform_score < maxp);

    // random valid belief stays a convex combination
    const auto belief = testing::random_belief(rng, cats);
    const double s = word_listener_score(table, belief, w);
    REQUIRE(s > 0.0);
    REQUIRE(s <= maxp + 1e-15);
  }
}

TEST_CASE("category-neutral words are belief-invariant") {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    SplitMix64 rng(derive_seed(32, "neutral" + std::to_string(i)));
    const double p = 0.05 + 0.001 * static_cast<double>(rng.next_below(600));
    const double q1 = 0.001 * static_cast<double>(1 + rng.next_below(900));
    const double q2 = 0.001 * static_cast<double>(1 + rng.next_below(900));
    const double q3 = 0.001 * static_cast<double>(1 + rng.next_below(900));
    const auto table = WordCategoryTable::from_probs(
        {"even", "spiky"}, {"c1", "c2", "c3"}, {{p, q1}, {p, q2}, {p, q3}});
    const auto belief =
        testing::random_belief(rng, {"c1", "c2", "c3"});
    REQUIRE(word_listener_score(table, belief, "even") ==
            doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("concentrated words are demoted under uncertainty") {
  // a word whose mass sits on one category scores strictly below its own
  // best-case (one-hot) score under a uniform belief; a flat word with the
  // same mean scores exactly the mean
  const auto table = worked_example_table();
  const auto uniform = CategoryBelief::uniform(table.categories());
  const double spiky = word_listener_score(table, uniform, "bus");
  CHECK(spiky < 0.9);
  const double mean = (0.9 + 0.1 + 0.1) / 3.0;
  CHECK(spiky == doctest::Approx(mean).epsilon(1e-12));
  const auto flat_same_mean = WordCategoryTable::from_probs(
      {"flat"}, {"c1", "c2", "c3"}, {{mean}, {mean}, {mean}});
  CHECK(word_listener_score(flat_same_mean, uniform, "flat") ==
        doctest::Approx(spiky).epsilon(1e-12));
}

TEST_CASE("s1_next_word_scores applies the listener exponent") {
  const Vocabulary vocab({"bus", "left"});
  const std::vector<double> s0{0.6, 0.4, 0.0};
  DecodeParams params;  // alpha 2, beta 2

  SUBCASE("uncertain listener flips the argmax to the unspecific word") {
    const std::vector<double> listener{11.0 / 30.0, 0.5, 1.0};
    const auto scores = s1_next_word_scores(s0, listener, vocab, {}, params);
    CHECK(scores[1] == doctest::Approx(0.4 * 0.25).epsilon(1e-12));  // left: 0.1
    CHECK(scores[0] ==
          doctest::Approx(0.6 * std::pow(11.0 / 30.0, 2)).epsilon(1e-12));
    CHECK(scores[1] > scores[0]);
  }
  SUBCASE("a certain listener keeps the specific word") {
    const std::vector<double> listener{0.83, 0.55, 1.0};
    const auto scores = s1_next_word_scores(s0, listener, vocab, {}, params);
    CHECK(scores[0] == doctest::Approx(0.6 * 0.83 * 0.83).epsilon(1e-12));
    CHECK(scores[1] == doctest::Approx(0.4 * 0.55 * 0.55).epsilon(1e-12));
    CHECK(scores[0] > scores[1]);
  }
  SUBCASE("alpha zero with an empty prefix is the identity") {
    params.alpha = 0.0;
    const std::vector<double> listener{0.3, 0.7, 1.0};
    const auto scores = s1_next_word_scores(s0, listener, vocab, {}, params);
    CHECK(scores == s0);
  }
  SUBCASE("repeated words take the alpha+beta exponent") {
    const std::vector<double> listener{0.5, 0.5, 1.0};
    Utterance prefix;
    prefix.tokens = {"bus"};
    const auto scores = s1_next_word_scores(s0, listener, vocab, prefix, params);
    CHECK(scores[0] == doctest::Approx(0.6 * std::pow(0.5, 4)).epsilon(1e-12));
    CHECK(scores[1] == doctest::Approx(0.4 * std::pow(0.5, 2)).epsilon(1e-12));
  }
  SUBCASE("EOS keeps its literal mass") {
    const std::vector<double> s0_eos{0.5, 0.3, 0.2};
    const std::vector<double> listener{0.5, 0.5, 1.0};
    const auto scores = s1_next_word_scores(s0_eos, listener, vocab, {}, params);
    CHECK(scores[2] == 0.2);
  }
  SUBCASE("mismatched sizes are rejected") {
    CHECK_THROWS_AS(
        s1_next_word_scores({0.5, 0.5}, {0.5, 0.5, 1.0}, vocab, {}, params),
        Error);
  }
  SUBCASE("the floor clamps zero listener scores") {
    params.listener_floor = 1e-9;
    const std::vector<double> listener{0.0, 0.5, 1.0};
    const auto scores = s1_next_word_scores(s0, listener, vocab, {}, params);
    CHECK(scores[0] == doctest::Approx(0.6 * 1e-18).epsilon(1e-12));
  }
}

TEST_CASE("s1_decode on the worked-example toy game starts with the safe word") {
  // a literal speaker mildly preferring "bus" over "left" at the first step
  std::vector<RefExRecord> records;
  for (int i = 0; i < 3; ++i) {
    RefExRecord rec;
    rec.scene.id = "b" + std::to_string(i);
    Referent r;
    r.id = "a";
    r.category = "c1";
    rec.scene.referents = {r};
    rec.target_id = "a";
    rec.expression.tokens = {"bus"};
    rec.expression.terminated = true;
    records.push_back(rec);
  }
  for (int i = 0; i < 2; ++i) {
    auto rec = records.front();
    rec.scene.id = "l" + std::to_string(i);
    rec.expression.tokens = {"left"};
    records.push_back(rec);
  }
  const auto corpus = RefExCorpus::from_records(std::move(records));
  const auto speaker = LiteralSpeaker::train(corpus, 0.1, {});
  const auto table = worked_example_table();

  Referent target;
  target.id = "a";
  target.category = "c1";

  // greedy literal output prefers "bus"
  const auto greedy = speaker.decode_greedy(target, 4);
  REQUIRE(greedy.tokens.front() == "bus");

  DecodeParams params;
  params.max_len = 4;
  const auto uniform = CategoryBelief::uniform(table.categories());
  const auto u = s1_decode(speaker, table, uniform, target, params);
  REQUIRE_FALSE(u.tokens.empty());
  CHECK(u.tokens.front() == "left");
}

TEST_CASE("alpha zero decoding equals greedy decoding") {
  const auto corpus = generate_world(testing::toy_world_config(5));
  const auto speaker =
      LiteralSpeaker::train(corpus, 0.1, testing::toy_feature_rule());
  const auto table = WordCategoryTable::estimate(corpus, 0.1);
  DecodeParams params;
  params.alpha = 0.0;
  params.max_len = 6;
  SplitMix64 rng(derive_seed(33, "alpha0"));
  for (int i = 0; i < 1000; ++i) {
    const auto ref = testing::random_referent(rng, corpus);
    const auto belief = testing::random_belief(rng, table.categories());
    const auto via_s1 = s1_decode(speaker, table, belief, ref, params);
    const auto via_greedy = speaker.decode_greedy(ref, params.max_len);
    REQUIRE(via_s1 == via_greedy);
  }
}

TEST_CASE("every decode step matches the brute-force rescoring oracle") {
  const auto corpus = generate_world(testing::toy_world_config(9));
  const auto speaker =
      LiteralSpeaker::train(corpus, 0.1, testing::toy_feature_rule());
  const auto table = WordCategoryTable::estimate(corpus, 0.1);
  DecodeParams params;
  params.max_len = 4;
  SplitMix64 rng(derive_seed(34, "steps"));
  for (int i = 0; i < 1000; ++i) {
    const auto ref = testing::random_referent(rng, corpus);
    const auto belief = (i % 2 == 0)
                            ? CategoryBelief::uniform(table.categories())
                            : testing::random_belief(rng, table.categories());
    const auto u = s1_decode(speaker, table, belief, ref, params);
    Utterance prefix;
    for (std::size_t t = 0; t <= u.tokens.size(); ++t) {
      const auto scores = testing::oracle_s1_step_scores(speaker, table, belief,
                                                         ref, prefix, params);
      const std::size_t best = testing::argmax_lowest(scores);
      if (t < u.tokens.size()) {
        REQUIRE(best < speaker.vocabulary().size());
        REQUIRE(speaker.vocabulary().token(best) == u.tokens[t]);
        prefix.tokens.push_back(u.tokens[t]);
      } else if (u.terminated) {
        REQUIRE(best == speaker.eos_id());
      }
    }
  }
}

TEST_CASE("s1_utterance_score") {
  const auto corpus = generate_world(testing::toy_world_config(3));
  const auto speaker =
      LiteralSpeaker::train(corpus, 0.1, testing::toy_feature_rule());
  const auto table = WordCategoryTable::estimate(corpus, 0.1);
  const auto uniform = CategoryBelief::uniform(table.categories());
  SplitMix64 rng(derive_seed(35, "utt"));
  const auto ref = testing::random_referent(rng, corpus);

  SUBCASE("a single-word utterance agrees with the first decode step") {
    Utterance u;
    u.tokens = {corpus.vocabulary().front()};
    const double score = s1_utterance_score(speaker, table, uniform, ref, u, 2.0);
    const double expected =
        speaker.step_prob(ref, kBosToken, u.tokens[0]) *
        std::pow(word_listener_score(table, uniform, u.tokens[0]), 2.0);
    CHECK(score == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("alpha zero reduces to the literal probability") {
    Utterance u;
    u.tokens = {corpus.vocabulary().front(), corpus.vocabulary().back()};
    u.terminated = true;
    CHECK(s1_utterance_score(speaker, table, uniform, ref, u, 0.0) ==
          doctest::Approx(std::exp(speaker.utterance_log_prob(ref, u)))
              .epsilon(1e-12));
  }
  SUBCASE("empty utterances are rejected") {
    CHECK_THROWS_AS(s1_utterance_score(speaker, table, uniform, ref, {}, 2.0),
                    Error);
  }
}

TEST_CASE("standard_rsa_listener") {
  const auto corpus = generate_world(testing::toy_world_config(17));
  const auto speaker =
      LiteralSpeaker::train(corpus, 0.1, testing::toy_feature_rule());
  SplitMix64 rng(derive_seed(36, "rsa"));

  SUBCASE("normalizes the prior-weighted literal probabilities") {
    for (int i = 0; i < 200; ++i) {
      const auto& rec =
          corpus.records()[rng.next_below(corpus.records().size())];
      Utterance u;
      const std::size_t len = 1 + rng.next_below(3);
      for (std::size_t t = 0; t < len; ++t) {
        u.tokens.push_back(
            corpus.vocabulary()[rng.next_below(corpus.vocabulary().size())]);
      }
      const auto probs = standard_rsa_listener(speaker, rec.scene, u);
      double sum = 0.0;
      for (double p : probs) sum += p;
      REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-9));
      // agrees with the definition computed from utterance_log_prob
      std::vector<double> expected(rec.scene.referents.size());
      double total = 0.0;
      for (std::size_t r = 0; r < expected.size(); ++r) {
        expected[r] =
            std::exp(speaker.utterance_log_prob(rec.scene.referents[r], u)) /
            static_cast<double>(expected.size());
        total += expected[r];
      }
      for (std::size_t r = 0; r < expected.size(); ++r) {
        REQUIRE(probs[r] == doctest::Approx(expected[r] / total).epsilon(1e-9));
      }
    }
  }
  SUBCASE("identical referents give a uniform posterior") {
    Scene scene;
    scene.id = "twins";
    for (int i = 0; i < 3; ++i) {
      Referent r;
      r.id = "r" + std::to_string(i);
      r.category = "cat";
      r.attributes["color"] = "black";
      r.attributes["position"] = "left";
      r.attributes["kind"] = "furry";
      scene.referents.push_back(std::move(r));
    }
    Utterance u;
    u.tokens = {"left"};
    const auto probs = standard_rsa_listener(speaker, scene, u);
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("the referent prior shifts the posterior") {
    Scene scene;
    scene.id = "prior";
    for (int i = 0; i < 2; ++i) {
      Referent r;
      r.id = "r" + std::to_string(i);
      r.category = "cat";
      r.attributes["color"] = "black";
      r.attributes["position"] = "left";
      r.attributes["kind"] = "furry";
      scene.referents.push_back(std::move(r));
    }
    scene.referent_prior = {0.9, 0.1};
    Utterance u;
    u.tokens = {"left"};
    const auto probs = standard_rsa_listener(speaker, scene, u);
    CHECK(probs[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(0.1).epsilon(1e-12));
  }
}
