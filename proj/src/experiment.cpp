#include "zsrg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "zsrg/jsonutil.hpp"
#include "zsrg/rng.hpp"

namespace zsrg {

using nlohmann::ordered_json;

namespace {

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

[[noreturn]] void rethrow_with_stage(const Error& e, const std::string& stage,
                                     const std::string& category) {
  std::string context = "stage '" + stage + "'";
  if (!category.empty()) context += ", category '" + category + "'";
  throw Error(e.code(), context + ": " + e.what());
}

WorldConfig world_config_from_json(const ordered_json& j,
                                   std::uint64_t default_seed) {
  WorldConfig w;
  w.seed = j.value("seed", default_seed);
  w.scenes_per_category = j.at("scenes_per_category").get<std::uint32_t>();
  if (j.contains("referents_per_scene")) {
    const auto range = j.at("referents_per_scene");
    if (!range.is_array() || range.size() != 2) {
      throw Error(ErrorCode::kParse, "referents_per_scene must be [min, max]");
    }
    w.min_referents = range[0].get<std::uint32_t>();
    w.max_referents = range[1].get<std::uint32_t>();
  }
  w.noise = j.value("noise", 0.0);
  for (const auto& jc : j.at("categories")) {
    CategoryDef def;
    def.id = jc.at("id").get<std::string>();
    if (jc.contains("fixed_attributes")) {
      for (const auto& [name, value] : jc.at("fixed_attributes").items()) {
        def.fixed_attributes[name] = value.get<std::string>();
      }
    }
    w.categories.push_back(std::move(def));
  }
  for (const auto& ja : j.at("attributes")) {
    AttributeDef def;
    def.name = ja.at("name").get<std::string>();
    def.values = ja.at("values").get<std::vector<std::string>>();
    w.attributes.push_back(std::move(def));
  }
  for (const auto& jt : j.at("templates")) {
    ExpressionTemplate t;
    t.pattern = jt.at("pattern").get<std::string>();
    t.weight = jt.value("weight", 1u);
    w.templates.push_back(std::move(t));
  }
  return w;
}

ordered_json world_config_to_json(const WorldConfig& w) {
  ordered_json j;
  j["seed"] = w.seed;
  j["scenes_per_category"] = w.scenes_per_category;
  j["referents_per_scene"] = {w.min_referents, w.max_referents};
  j["noise"] = w.noise;
  j["categories"] = ordered_json::array();
  for (const auto& c : w.categories) {
    ordered_json jc;
    jc["id"] = c.id;
    jc["fixed_attributes"] = ordered_json::object();
    for (const auto& [name, value] : c.fixed_attributes) {
      jc["fixed_attributes"][name] = value;
    }
    j["categories"].push_back(std::move(jc));
  }
  j["attributes"] = ordered_json::array();
  for (const auto& a : w.attributes) {
    j["attributes"].push_back({{"name", a.name}, {"values", a.values}});
  }
  j["templates"] = ordered_json::array();
  for (const auto& t : w.templates) {
    j["templates"].push_back({{"pattern", t.pattern}, {"weight", t.weight}});
  }
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (world.has_value() == corpus_path.has_value()) {
    throw Error(ErrorCode::kInvalid,
                "config must have exactly one of 'world' and 'corpus_path'");
  }
  if (world) world->validate();
  if (zero_shot_categories.empty()) {
    throw Error(ErrorCode::kInvalid, "config names no zero-shot categories");
  }
  decode.validate();
  if (smoothing_k < 0.0) {
    throw Error(ErrorCode::kInvalid, "smoothing_k must be nonnegative");
  }
  if ((belief_mode == BeliefMode::kCustom) != !custom_belief.empty()) {
    throw Error(ErrorCode::kInvalid,
                "custom_belief is required iff belief_mode is custom");
  }
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("world")) c.world = world_config_from_json(j.at("world"), c.seed);
    if (j.contains("corpus_path")) c.corpus_path = j.at("corpus_path").get<std::string>();
    c.zero_shot_categories =
        j.at("zero_shot_categories").get<std::vector<CategoryId>>();
    if (j.contains("similar_categories")) {
      std::map<CategoryId, std::vector<CategoryId>> m;
      for (const auto& [target, pool] : j.at("similar_categories").items()) {
        m[target] = pool.get<std::vector<CategoryId>>();
      }
      c.similar = SimilarCategoryMap(std::move(m));
    }
    if (j.contains("synonyms")) {
      for (const auto& [cat, names] : j.at("synonyms").items()) {
        c.synonyms[cat] = names.get<std::vector<Token>>();
      }
    }
    c.smoothing_k = j.value("smoothing_k", 0.1);
    c.belief_mode = belief_mode_from_string(j.value("belief_mode", "uniform"));
    if (j.contains("custom_belief")) {
      for (const auto& [cat, p] : j.at("custom_belief").items()) {
        c.custom_belief[cat] = p.get<double>();
      }
    }
    if (j.contains("decode")) {
      const auto& jd = j.at("decode");
      c.decode.alpha = jd.value("alpha", 2.0);
      c.decode.beta_repeat = jd.value("beta_repeat", 2.0);
      c.decode.max_len = jd.value("max_len", std::size_t{10});
      c.decode.listener_floor = jd.value("listener_floor", 1e-9);
    }
    if (j.contains("feature_rule")) {
      const auto& jf = j.at("feature_rule");
      c.feature_rule.use_category = jf.value("use_category", true);
      if (jf.contains("attributes")) {
        c.feature_rule.attributes =
            jf.at("attributes").get<std::vector<std::string>>();
      }
    }
    c.ts_distractors_k = j.value("ts_distractors_k", std::size_t{4});
    c.output_dir = j.value("output_dir", std::string("out"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(read_file(path));
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  if (c.world) j["world"] = world_config_to_json(*c.world);
  if (c.corpus_path) j["corpus_path"] = *c.corpus_path;
  j["zero_shot_categories"] = c.zero_shot_categories;
  j["similar_categories"] = ordered_json::object();
  for (const auto& [target, pool] : c.similar.map()) {
    j["similar_categories"][target] = pool;
  }
  j["synonyms"] = ordered_json::object();
  for (const auto& [cat, names] : c.synonyms) j["synonyms"][cat] = names;
  j["smoothing_k"] = c.smoothing_k;
  j["belief_mode"] = belief_mode_to_string(c.belief_mode);
  if (!c.custom_belief.empty()) {
    j["custom_belief"] = ordered_json::object();
    for (const auto& [cat, p] : c.custom_belief) j["custom_belief"][cat] = p;
  }
  j["decode"] = {{"alpha", c.decode.alpha},
                 {"beta_repeat", c.decode.beta_repeat},
                 {"max_len", c.decode.max_len},
                 {"listener_floor", c.decode.listener_floor}};
  j["feature_rule"] = {{"use_category", c.feature_rule.use_category},
                       {"attributes", c.feature_rule.attributes}};
  j["ts_distractors_k"] = c.ts_distractors_k;
  j["output_dir"] = c.output_dir;
  return j.dump(2);
}

namespace {

struct GeneratedPair {
  std::vector<Utterance> s0;
  std::vector<Utterance> s1;
};

GeneratedPair generate_for_targets(const RefExCorpus& test_z,
                                   const LiteralSpeaker& s0,
                                   const WordCategoryTable& table_z,
                                   const ExperimentConfig& config) {
  std::optional<std::vector<double>> custom;
  if (config.belief_mode == BeliefMode::kCustom) {
    std::vector<double> probs;
    probs.reserve(table_z.categories().size());
    for (const auto& c : table_z.categories()) {
      const auto it = config.custom_belief.find(c);
      probs.push_back(it == config.custom_belief.end() ? 0.0 : it->second);
    }
    custom = std::move(probs);
  }
  GeneratedPair out;
  for (const auto& rec : test_z.records()) {
    const auto& target = rec.target();
    out.s0.push_back(s0.decode_greedy(target, config.decode.max_len));
    const auto belief = make_category_belief(config.belief_mode, target,
                                             table_z.categories(), custom);
    out.s1.push_back(s1_decode(s0, table_z, belief, target, config.decode));
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  RefExCorpus corpus;
  try {
    corpus = config.world ? generate_world(*config.world)
                          : load_corpus(*config.corpus_path);
  } catch (const Error& e) {
    rethrow_with_stage(e, "corpus", "");
  }
  try {
    for (const auto& z : config.zero_shot_categories) {
      if (!corpus.has_category(z)) {
        throw Error(ErrorCode::kInvalid,
                    "zero-shot category '" + z + "' not in corpus");
      }
      config.similar.pool(z);  // must exist
    }
    config.similar.validate(corpus.categories());
  } catch (const Error& e) {
    rethrow_with_stage(e, "validate", "");
  }

  const auto lexicon = build_noun_lexicon(corpus.categories(), config.synonyms);

  LiteralSpeaker s_eval;
  WordCategoryTable table_full;
  try {
    s_eval = LiteralSpeaker::train(corpus, config.smoothing_k, config.feature_rule);
    table_full = WordCategoryTable::estimate(corpus, config.smoothing_k);
  } catch (const Error& e) {
    rethrow_with_stage(e, "train-eval", "");
  }

  ExperimentReport report;
  report.artifact_version = kArtifactVersion;
  report.generated_at = iso_utc_now();
  report.seed = config.seed;
  report.config_echo = experiment_config_to_json(config);

  for (const auto& z : config.zero_shot_categories) {
    CategoryResult result;
    result.category = z;

    RefExCorpus train, test_z;
    try {
      auto [tr, te] = zero_shot_split(corpus, {z});
      train = std::move(tr);
      test_z = te.filter_by_target_category(z);
      if (test_z.records().empty()) {
        throw Error(ErrorCode::kInvalid, "no test targets for this category");
      }
    } catch (const Error& e) {
      rethrow_with_stage(e, "split", z);
    }

    LiteralSpeaker s0;
    WordCategoryTable table_z;
    try {
      s0 = LiteralSpeaker::train(train, config.smoothing_k, config.feature_rule);
      table_z = WordCategoryTable::estimate(train, config.smoothing_k);
    } catch (const Error& e) {
      rethrow_with_stage(e, "train", z);
    }

    GeneratedPair generated;
    try {
      generated = generate_for_targets(test_z, s0, table_z, config);
    } catch (const Error& e) {
      rethrow_with_stage(e, "generate", z);
    }

    try {
      result.s0.nouns = noun_metrics(generated.s0, lexicon, z);
      result.s1.nouns = noun_metrics(generated.s1, lexicon, z);
    } catch (const Error& e) {
      rethrow_with_stage(e, "noun-metrics", z);
    }

    try {
      std::vector<Scene> ts_image;
      ts_image.reserve(test_z.records().size());
      for (const auto& rec : test_z.records()) ts_image.push_back(rec.scene);
      const auto ts_distr =
          build_ts_distractors(test_z, config.similar, config.ts_distractors_k,
                               derive_seed(config.seed, "ts-distractors/" + z));
      result.s0.acc_ts_image =
          resolution_accuracy(ts_image, generated.s0, s_eval, table_full, lexicon);
      result.s1.acc_ts_image =
          resolution_accuracy(ts_image, generated.s1, s_eval, table_full, lexicon);
      result.s0.acc_ts_distractors =
          resolution_accuracy(ts_distr, generated.s0, s_eval, table_full, lexicon);
      result.s1.acc_ts_distractors =
          resolution_accuracy(ts_distr, generated.s1, s_eval, table_full, lexicon);
    } catch (const Error& e) {
      rethrow_with_stage(e, "resolution", z);
    }

    report.results.push_back(std::move(result));
  }
  return report;
}

// ---------------------------------------------------------------------------
// report emission

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "md" || s == "markdown") return ReportFormat::kMarkdown;
  throw Error(ErrorCode::kInvalid, "unknown report format '" + s + "'");
}

namespace {

ordered_json speaker_metrics_to_json(const SpeakerMetrics& m) {
  return {{"distr_noun_rate", m.nouns.distr_noun_rate},
          {"no_noun_rate", m.nouns.no_noun_rate},
          {"n", m.nouns.n},
          {"acc_ts_image", m.acc_ts_image},
          {"acc_ts_distractors", m.acc_ts_distractors}};
}

SpeakerMetrics speaker_metrics_from_json(const ordered_json& j) {
  SpeakerMetrics m;
  m.nouns.distr_noun_rate = j.at("distr_noun_rate").get<double>();
  m.nouns.no_noun_rate = j.at("no_noun_rate").get<double>();
  m.nouns.n = j.at("n").get<std::size_t>();
  m.acc_ts_image = j.at("acc_ts_image").get<double>();
  m.acc_ts_distractors = j.at("acc_ts_distractors").get<double>();
  return m;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  ordered_json j;
  j["format"] = "zsrg-report";
  j["format_version"] = 1;
  j["artifact_version"] = report.artifact_version;
  j["generated_at"] = report.generated_at;
  j["seed"] = report.seed;
  j["config"] = ordered_json::parse(report.config_echo);
  j["results"] = ordered_json::array();
  for (const auto& r : report.results) {
    j["results"].push_back({{"category", r.category},
                            {"s0", speaker_metrics_to_json(r.s0)},
                            {"s1", speaker_metrics_to_json(r.s1)}});
  }
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad report json: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "zsrg-report") {
    throw Error(ErrorCode::kParse, "not a zsrg-report artifact");
  }
  ExperimentReport report;
  try {
    report.artifact_version = j.at("artifact_version").get<std::string>();
    report.generated_at = j.at("generated_at").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config_echo = j.at("config").dump(2);
    for (const auto& jr : j.at("results")) {
      CategoryResult r;
      r.category = jr.at("category").get<std::string>();
      r.s0 = speaker_metrics_from_json(jr.at("s0"));
      r.s1 = speaker_metrics_from_json(jr.at("s1"));
      report.results.push_back(std::move(r));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad report json: ") + e.what());
  }
  return report;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out =
      "category,speaker,distr_noun_rate,no_noun_rate,acc_ts_image,acc_ts_distractors\n";
  for (const auto& r : report.results) {
    const auto row = [&](const char* speaker, const SpeakerMetrics& m) {
      out += r.category;
      out += ',';
      out += speaker;
      out += ',';
      out += format_rate(m.nouns.distr_noun_rate);
      out += ',';
      out += format_rate(m.nouns.no_noun_rate);
      out += ',';
      out += format_rate(m.acc_ts_image);
      out += ',';
      out += format_rate(m.acc_ts_distractors);
      out += '\n';
    };
    row("s0", r.s0);
    row("s1", r.s1);
  }
  return out;
}

std::string report_to_markdown(const ExperimentReport& report) {
  std::string out;
  out += "## Names and nouns in generation output\n\n";
  out += "| category | speaker | distr_noun_rate | no_noun_rate |\n";
  out += "|---|---|---|---|\n";
  for (const auto& r : report.results) {
    const auto row = [&](const char* speaker, const SpeakerMetrics& m) {
      out += "| " + r.category + " | " + speaker + " | " +
             format_rate(m.nouns.distr_noun_rate) + " | " +
             format_rate(m.nouns.no_noun_rate) + " |\n";
    };
    row("s0", r.s0);
    row("s1", r.s1);
  }
  out += "\n## Reference resolution accuracy\n\n";
  out += "| category | speaker | acc_ts_image | acc_ts_distractors |\n";
  out += "|---|---|---|---|\n";
  for (const auto& r : report.results) {
    const auto row = [&](const char* speaker, const SpeakerMetrics& m) {
      out += "| " + r.category + " | " + speaker + " | " +
             format_rate(m.acc_ts_image) + " | " +
             format_rate(m.acc_ts_distractors) + " |\n";
    };
    row("s0", r.s0);
    row("s1", r.s1);
  }
  return out;
}

void emit_report(const ExperimentReport& report, const std::string& path,
                 ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      write_file(path, report_to_json(report));
      return;
    case ReportFormat::kCsv:
      write_file(path, report_to_csv(report));
      return;
    case ReportFormat::kMarkdown:
      write_file(path, report_to_markdown(report));
      return;
  }
  throw Error(ErrorCode::kInternal, "bad report format");
}

ExperimentReport load_report(const std::string& path) {
  return report_from_json(read_file(path));
}

}  // namespace zsrg
