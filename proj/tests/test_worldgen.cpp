#include <doctest.h>

#include <map>
#include <set>

#include "test_support.hpp"
#include "zsrg/corpus.hpp"
#include "zsrg/experiment.hpp"
#include "zsrg/worldgen.hpp"

using namespace zsrg;

TEST_CASE("generate_world is a deterministic function of the config") {
  const auto config = testing::toy_world_config(42);
  const auto a = generate_world(config);
  const auto b = generate_world(config);
  CHECK(a == b);
  CHECK(corpus_to_jsonl(a) == corpus_to_jsonl(b));
}

TEST_CASE("changing the seed changes the corpus") {
  auto config = testing::toy_world_config(42);
  const auto a = generate_world(config);
  config.seed = 43;
  const auto b = generate_world(config);
  CHECK(a.records().size() == b.records().size());
  CHECK(a != b);
}

TEST_CASE("the demo world covers the full test-category inventory") {
  const auto config = load_experiment_config(ZSRG_DEMO_CONFIG);
  REQUIRE(config.world.has_value());
  const auto corpus = generate_world(*config.world);
  for (const char* c : {"cat", "horse", "cup", "bottle", "bus", "train", "dog",
                        "cow", "bowl", "wine_glass", "vase", "car", "truck"}) {
    CHECK(corpus.has_category(c));
  }
  for (const auto& z : config.zero_shot_categories) {
    for (const auto& similar : config.similar.pool(z)) {
      CHECK(corpus.has_category(similar));
    }
  }
}

TEST_CASE("generated scenes are mutually distinguishable") {
  const auto corpus = generate_world(testing::toy_world_config(7));
  for (const auto& rec : corpus.records()) {
    const auto& rs = rec.scene.referents;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      for (std::size_t j = i + 1; j < rs.size(); ++j) {
        const bool differs =
            rs[i].category != rs[j].category || rs[i].attributes != rs[j].attributes;
        REQUIRE(differs);
      }
    }
  }
}

TEST_CASE("every category names itself more than any other noun") {
  const auto corpus = generate_world(testing::toy_world_config(7));
  // on the train half of a zero-shot split, every remaining category's own
  // name is still the most likely noun
  const auto [train, test] = zero_shot_split(corpus, {"cat"});
  const auto table = WordCategoryTable::estimate(train, 0.0);
  std::set<Token> nouns;
  for (const auto& c : corpus.categories()) nouns.insert(c);
  for (const auto& c : corpus.categories()) {
    if (c == "cat") continue;
    Token best;
    double best_p = -1.0;
    for (const auto& n : nouns) {
      const double p = table.prob(n, c);
      if (p > best_p) {
        best_p = p;
        best = n;
      }
    }
    CHECK(best == c);
  }
}

TEST_CASE("expressions realize the target's attributes") {
  const auto config = testing::toy_world_config(99);
  const auto corpus = generate_world(config);
  std::set<std::string> colors{"black", "white"};
  std::set<std::string> positions{"left", "right"};
  for (const auto& rec : corpus.records()) {
    const auto& target = rec.target();
    for (const auto& tok : rec.expression.tokens) {
      if (colors.count(tok)) CHECK(tok == target.attributes.at("color"));
      if (positions.count(tok)) CHECK(tok == target.attributes.at("position"));
    }
    CHECK_FALSE(rec.expression.tokens.empty());
  }
}

TEST_CASE("world config validation") {
  auto config = testing::toy_world_config(1);

  SUBCASE("unsatisfiable referent demand") {
    config.categories.resize(1);
    config.attributes = {{"color", {"black"}}, {"position", {"left"}}};
    config.min_referents = config.max_referents = 3;
    CHECK_THROWS_AS(generate_world(config), Error);
    try {
      generate_world(config);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUnsatisfiable);
    }
  }
  SUBCASE("template referencing an unknown attribute") {
    config.templates.push_back({"{size} {name}", 5});
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("size"), Error);
  }
  SUBCASE("noise outside the unit interval") {
    config.noise = 1.5;
    CHECK_THROWS_AS(config.validate(), Error);
  }
  SUBCASE("duplicate category ids") {
    config.categories.push_back(config.categories.front());
    CHECK_THROWS_AS(config.validate(), Error);
  }
}
