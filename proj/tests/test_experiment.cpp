#include <doctest.h>

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "zsrg/experiment.hpp"
#include "zsrg/jsonutil.hpp"

using namespace zsrg;

namespace {

ExperimentConfig tiny_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.world = testing::toy_world_config(seed);
  c.zero_shot_categories = {"cat", "bus"};
  c.similar = testing::make_similar({{"cat", {"dog"}}, {"bus", {"car"}}});
  c.feature_rule = testing::toy_feature_rule();
  c.decode.max_len = 5;
  c.ts_distractors_k = 3;
  c.seed = seed;
  return c;
}

std::string without_timestamp(const std::string& report_json) {
  auto j = nlohmann::ordered_json::parse(report_json);
  j.erase("generated_at");
  return j.dump(2);
}

}  // namespace

TEST_CASE("the demo config file parses with all sections") {
  const auto c = load_experiment_config(ZSRG_DEMO_CONFIG);
  CHECK(c.world.has_value());
  CHECK_FALSE(c.corpus_path.has_value());
  CHECK(c.zero_shot_categories.size() == 6);
  CHECK(c.similar.map().size() == 6);
  CHECK(c.smoothing_k == 0.1);
  CHECK(c.decode.alpha == 2.0);
  CHECK(c.decode.beta_repeat == 2.0);
  CHECK(c.belief_mode == BeliefMode::kUniform);
  CHECK(c.feature_rule.use_category);
  CHECK(c.feature_rule.attributes ==
        std::vector<std::string>{"kind", "color", "position"});
  CHECK(c.world->seed == 20180905);
}

TEST_CASE("experiment config validation") {
  SUBCASE("exactly one corpus source is required") {
    CHECK_THROWS_WITH_AS(
        experiment_config_from_json(R"({"zero_shot_categories":["cat"]})"),
        doctest::Contains("exactly one"), Error);
    auto c = tiny_config(1);
    c.corpus_path = "also.jsonl";
    CHECK_THROWS_AS(c.validate(), Error);
  }
  SUBCASE("custom belief requires custom mode") {
    auto c = tiny_config(1);
    c.custom_belief["cat"] = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
  }
  SUBCASE("config echo round trips") {
    const auto c = load_experiment_config(ZSRG_DEMO_CONFIG);
    const auto echoed = experiment_config_from_json(experiment_config_to_json(c));
    CHECK(experiment_config_to_json(echoed) == experiment_config_to_json(c));
  }
}

TEST_CASE("run_experiment produces a complete, deterministic report") {
  const auto config = tiny_config(77);
  const auto report = run_experiment(config);

  SUBCASE("every configured category is covered for both speakers") {
    REQUIRE(report.results.size() == config.zero_shot_categories.size());
    for (std::size_t i = 0; i < report.results.size(); ++i) {
      const auto& r = report.results[i];
      CHECK(r.category == config.zero_shot_categories[i]);
      CHECK(r.s0.nouns.n > 0);
      CHECK(r.s1.nouns.n == r.s0.nouns.n);
      for (const auto& m : {r.s0, r.s1}) {
        CHECK(m.nouns.distr_noun_rate >= 0.0);
        CHECK(m.nouns.distr_noun_rate <= 1.0);
        CHECK(m.nouns.no_noun_rate >= 0.0);
        CHECK(m.nouns.no_noun_rate <= 1.0);
        CHECK(m.acc_ts_image >= 0.0);
        CHECK(m.acc_ts_image <= 1.0);
        CHECK(m.acc_ts_distractors >= 0.0);
        CHECK(m.acc_ts_distractors <= 1.0);
      }
    }
  }
  SUBCASE("a rerun is identical modulo the timestamp") {
    const auto again = run_experiment(config);
    CHECK(without_timestamp(report_to_json(report)) ==
          without_timestamp(report_to_json(again)));
    CHECK(report.results == again.results);
    CHECK(report.config_echo == again.config_echo);
  }
  SUBCASE("json round trip preserves the report") {
    const auto reloaded = report_from_json(report_to_json(report));
    CHECK(reloaded == report);
  }
  SUBCASE("csv has the documented header and one row per speaker") {
    const auto csv = report_to_csv(report);
    CHECK(csv.rfind("category,speaker,distr_noun_rate,no_noun_rate,"
                    "acc_ts_image,acc_ts_distractors\n",
                    0) == 0);
    std::size_t rows = 0;
    for (char ch : csv) rows += (ch == '\n') ? 1 : 0;
    CHECK(rows == 1 + 2 * report.results.size());
  }
  SUBCASE("markdown mirrors the two result tables") {
    const auto md = report_to_markdown(report);
    for (const auto& r : report.results) {
      CHECK(md.find("| " + r.category + " | s0 | ") != std::string::npos);
      CHECK(md.find("| " + r.category + " | s1 | ") != std::string::npos);
    }
    CHECK(md.find("acc_ts_distractors") != std::string::npos);
  }
  SUBCASE("emit and reload through files") {
    const auto dir = std::filesystem::temp_directory_path() / "zsrg_test_report";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "report.json").string();
    emit_report(report, path, ReportFormat::kJson);
    const auto reloaded = load_report(path);
    CHECK(reloaded == report);
    emit_report(report, (dir / "report.csv").string(), ReportFormat::kCsv);
    emit_report(report, (dir / "report.md").string(), ReportFormat::kMarkdown);
    CHECK(read_file((dir / "report.csv").string()) == report_to_csv(report));
  }
}

TEST_CASE("a corpus file can stand in for the generated world") {
  const auto dir = std::filesystem::temp_directory_path() / "zsrg_test_corpus";
  std::filesystem::create_directories(dir);
  const auto corpus_path = (dir / "toy.jsonl").string();
  save_corpus(generate_world(testing::toy_world_config(77)), corpus_path);

  auto config = tiny_config(77);
  config.world.reset();
  config.corpus_path = corpus_path;
  const auto report = run_experiment(config);

  // identical to running from the inline world: the corpus is the same
  auto inline_config = tiny_config(77);
  const auto inline_report = run_experiment(inline_config);
  CHECK(report.results == inline_report.results);
}

TEST_CASE("errors carry stage and category context") {
  SUBCASE("unknown zero-shot category") {
    auto config = tiny_config(5);
    config.zero_shot_categories = {"zebra"};
    config.similar = testing::make_similar({{"zebra", {"dog"}}});
    CHECK_THROWS_WITH_AS(run_experiment(config), doctest::Contains("validate"),
                         Error);
  }
  SUBCASE("missing similar-category pool") {
    auto config = tiny_config(5);
    config.similar = testing::make_similar({{"cat", {"dog"}}});  // no pool for bus
    CHECK_THROWS_WITH_AS(run_experiment(config), doctest::Contains("bus"), Error);
  }
  SUBCASE("split that empties the training half") {
    // every scene contains a cat, so the cat split leaves nothing to train on
    std::vector<RefExRecord> records;
    for (int i = 0; i < 3; ++i) {
      RefExRecord rec;
      rec.scene.id = "s" + std::to_string(i);
      Referent cat;
      cat.id = "a";
      cat.category = "cat";
      Referent dog;
      dog.id = "b";
      dog.category = "dog";
      rec.scene.referents = {cat, dog};
      rec.target_id = "a";
      rec.expression.tokens = {"cat"};
      rec.expression.terminated = true;
      records.push_back(std::move(rec));
    }
    const auto dir = std::filesystem::temp_directory_path() / "zsrg_test_empty";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "allcat.jsonl").string();
    save_corpus(RefExCorpus::from_records(std::move(records)), path);

    ExperimentConfig config;
    config.corpus_path = path;
    config.zero_shot_categories = {"cat"};
    config.similar = testing::make_similar({{"cat", {"dog"}}});
    CHECK_THROWS_WITH_AS(run_experiment(config),
                         doctest::Contains("stage 'train'"), Error);
  }
}
