#include "zsrg.h"

#include <cstring>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsrg/corpus.hpp"
#include "zsrg/evaluation.hpp"
#include "zsrg/experiment.hpp"
#include "zsrg/jsonutil.hpp"
#include "zsrg/pragmatics.hpp"
#include "zsrg/rng.hpp"
#include "zsrg/speaker.hpp"
#include "zsrg/worldgen.hpp"

using nlohmann::ordered_json;

struct zsrg_corpus {
  zsrg::RefExCorpus impl;
};
struct zsrg_speaker {
  zsrg::LiteralSpeaker impl;
};
struct zsrg_table {
  zsrg::WordCategoryTable impl;
};
struct zsrg_report {
  zsrg::ExperimentReport impl;
};

namespace {

thread_local std::string g_last_error;

int code_of(const zsrg::Error& e) {
  switch (e.code()) {
    case zsrg::ErrorCode::kIo: return ZSRG_ERR_IO;
    case zsrg::ErrorCode::kParse: return ZSRG_ERR_PARSE;
    case zsrg::ErrorCode::kInvalid: return ZSRG_ERR_INVALID;
    case zsrg::ErrorCode::kUnsatisfiable: return ZSRG_ERR_UNSATISFIABLE;
    case zsrg::ErrorCode::kInternal: return ZSRG_ERR_INTERNAL;
  }
  return ZSRG_ERR_INTERNAL;
}

template <typename Fn>
int wrap(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ZSRG_OK;
  } catch (const zsrg::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ZSRG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ZSRG_ERR_INTERNAL;
  }
}

int invalid(const char* message) {
  g_last_error = message;
  return ZSRG_ERR_INVALID;
}

zsrg::DecodeParams to_decode_params(const zsrg_decode_params* params) {
  zsrg::DecodeParams p;
  if (params) {
    p.alpha = params->alpha;
    p.beta_repeat = params->beta_repeat;
    p.max_len = params->max_len;
    p.listener_floor = params->listener_floor;
  }
  return p;
}

}  // namespace

extern "C" {

const char* zsrg_version(void) { return zsrg::kArtifactVersion; }

const char* zsrg_last_error(void) { return g_last_error.c_str(); }

void zsrg_decode_params_init(zsrg_decode_params* params) {
  if (!params) return;
  const zsrg::DecodeParams defaults;
  params->alpha = defaults.alpha;
  params->beta_repeat = defaults.beta_repeat;
  params->max_len = defaults.max_len;
  params->listener_floor = defaults.listener_floor;
}

/* ---- corpus ---------------------------------------------------------- */

int zsrg_corpus_load(const char* path, zsrg_corpus** out) {
  if (!path || !out) return invalid("null argument");
  return wrap([&] { *out = new zsrg_corpus{zsrg::load_corpus(path)}; });
}

int zsrg_corpus_save(const zsrg_corpus* corpus, const char* path) {
  if (!corpus || !path) return invalid("null argument");
  return wrap([&] { zsrg::save_corpus(corpus->impl, path); });
}

int zsrg_corpus_generate(const char* config_path, int has_seed_override,
                         uint64_t seed_override, zsrg_corpus** out) {
  if (!config_path || !out) return invalid("null argument");
  return wrap([&] {
    auto config = zsrg::load_experiment_config(config_path);
    if (!config.world) {
      throw zsrg::Error(zsrg::ErrorCode::kInvalid,
                        "config has no 'world' section to generate from");
    }
    if (has_seed_override) config.world->seed = seed_override;
    *out = new zsrg_corpus{zsrg::generate_world(*config.world)};
  });
}

int zsrg_corpus_split(const zsrg_corpus* corpus, const char* const* zero_shot,
                      size_t n_zero_shot, zsrg_corpus** train, zsrg_corpus** test) {
  if (!corpus || !train || !test || (n_zero_shot > 0 && !zero_shot)) {
    return invalid("null argument");
  }
  return wrap([&] {
    std::set<zsrg::CategoryId> zs;
    for (size_t i = 0; i < n_zero_shot; ++i) {
      if (!zero_shot[i]) {
        throw zsrg::Error(zsrg::ErrorCode::kInvalid, "null category name");
      }
      zs.insert(zero_shot[i]);
    }
    auto [tr, te] = zsrg::zero_shot_split(corpus->impl, zs);
    *train = new zsrg_corpus{std::move(tr)};
    *test = new zsrg_corpus{std::move(te)};
  });
}

size_t zsrg_corpus_record_count(const zsrg_corpus* corpus) {
  return corpus ? corpus->impl.records().size() : 0;
}

size_t zsrg_corpus_category_count(const zsrg_corpus* corpus) {
  return corpus ? corpus->impl.categories().size() : 0;
}

const char* zsrg_corpus_category(const zsrg_corpus* corpus, size_t index) {
  if (!corpus || index >= corpus->impl.categories().size()) return nullptr;
  return corpus->impl.categories()[index].c_str();
}

size_t zsrg_corpus_vocab_size(const zsrg_corpus* corpus) {
  return corpus ? corpus->impl.vocabulary().size() : 0;
}

void zsrg_corpus_free(zsrg_corpus* corpus) { delete corpus; }

/* ---- literal speaker -------------------------------------------------- */

int zsrg_speaker_train(const zsrg_corpus* corpus, double smoothing_k,
                       int use_category, const char* const* attributes,
                       size_t n_attributes, zsrg_speaker** out) {
  if (!corpus || !out || (n_attributes > 0 && !attributes)) {
    return invalid("null argument");
  }
  return wrap([&] {
    zsrg::FeatureRule rule;
    rule.use_category = use_category != 0;
    for (size_t i = 0; i < n_attributes; ++i) {
      if (!attributes[i]) {
        throw zsrg::Error(zsrg::ErrorCode::kInvalid, "null attribute name");
      }
      rule.attributes.emplace_back(attributes[i]);
    }
    *out = new zsrg_speaker{
        zsrg::LiteralSpeaker::train(corpus->impl, smoothing_k, rule)};
  });
}

int zsrg_speaker_save(const zsrg_speaker* speaker, const char* path) {
  if (!speaker || !path) return invalid("null argument");
  return wrap([&] { speaker->impl.save(path); });
}

int zsrg_speaker_load(const char* path, zsrg_speaker** out) {
  if (!path || !out) return invalid("null argument");
  return wrap([&] { *out = new zsrg_speaker{zsrg::LiteralSpeaker::load(path)}; });
}

void zsrg_speaker_free(zsrg_speaker* speaker) { delete speaker; }

/* ---- word-category table ---------------------------------------------- */

int zsrg_table_estimate(const zsrg_corpus* corpus, double smoothing_k,
                        zsrg_table** out) {
  if (!corpus || !out) return invalid("null argument");
  return wrap([&] {
    *out = new zsrg_table{
        zsrg::WordCategoryTable::estimate(corpus->impl, smoothing_k)};
  });
}

int zsrg_table_save(const zsrg_table* table, const char* path) {
  if (!table || !path) return invalid("null argument");
  return wrap([&] { table->impl.save(path); });
}

int zsrg_table_load(const char* path, zsrg_table** out) {
  if (!path || !out) return invalid("null argument");
  return wrap([&] { *out = new zsrg_table{zsrg::WordCategoryTable::load(path)}; });
}

size_t zsrg_table_category_count(const zsrg_table* table) {
  return table ? table->impl.categories().size() : 0;
}

const char* zsrg_table_category(const zsrg_table* table, size_t index) {
  if (!table || index >= table->impl.categories().size()) return nullptr;
  return table->impl.categories()[index].c_str();
}

int zsrg_table_prob(const zsrg_table* table, const char* word,
                    const char* category, double* out) {
  if (!table || !word || !category || !out) return invalid("null argument");
  return wrap([&] { *out = table->impl.prob(word, category); });
}

int zsrg_word_listener_score(const zsrg_table* table, const double* belief,
                             size_t n_belief, const char* word, double* out) {
  if (!table || !belief || !word || !out) return invalid("null argument");
  return wrap([&] {
    const auto& categories = table->impl.categories();
    if (n_belief != categories.size()) {
      throw zsrg::Error(zsrg::ErrorCode::kInvalid,
                        "belief length does not match the table inventory");
    }
    const auto b = zsrg::CategoryBelief::from_raw_weights_unchecked(
        categories, std::vector<double>(belief, belief + n_belief));
    *out = zsrg::word_listener_score(table->impl, b, word);
  });
}

void zsrg_table_free(zsrg_table* table) { delete table; }

/* ---- generation and evaluation ---------------------------------------- */

int zsrg_generate_to_file(const zsrg_speaker* speaker, const zsrg_table* table,
                          const zsrg_corpus* targets, const char* category_filter,
                          int mode, const char* belief_mode,
                          const zsrg_decode_params* params, const char* out_path) {
  if (!speaker || !targets || !out_path) return invalid("null argument");
  if (mode != ZSRG_SPEAKER_S0 && mode != ZSRG_SPEAKER_S1) {
    return invalid("mode must be ZSRG_SPEAKER_S0 or ZSRG_SPEAKER_S1");
  }
  if (mode == ZSRG_SPEAKER_S1 && !table) {
    return invalid("pragmatic decoding requires a word-category table");
  }
  return wrap([&] {
    const auto p = to_decode_params(params);
    p.validate();
    const auto bmode = zsrg::belief_mode_from_string(
        belief_mode ? belief_mode : "uniform");
    zsrg::RefExCorpus corpus =
        category_filter ? targets->impl.filter_by_target_category(category_filter)
                        : targets->impl;
    std::string out;
    for (const auto& rec : corpus.records()) {
      const auto& target = rec.target();
      zsrg::Utterance u;
      if (mode == ZSRG_SPEAKER_S0) {
        u = speaker->impl.decode_greedy(target, p.max_len);
      } else {
        const auto belief = zsrg::make_category_belief(
            bmode, target, table->impl.categories());
        u = zsrg::s1_decode(speaker->impl, table->impl, belief, target, p);
      }
      ordered_json j;
      j["scene_id"] = rec.scene.id;
      j["target_id"] = rec.target_id;
      j["category"] = target.category;
      j["tokens"] = u.tokens;
      j["terminated"] = u.terminated;
      out += j.dump();
      out += '\n';
    }
    zsrg::write_file(out_path, out);
  });
}

int zsrg_eval_to_file(const char* config_path, const zsrg_corpus* test,
                      const char* expressions_path, const zsrg_speaker* s_eval,
                      const zsrg_table* table_full, const char* category,
                      const char* out_path) {
  if (!config_path || !test || !expressions_path || !s_eval || !table_full ||
      !category || !out_path) {
    return invalid("null argument");
  }
  return wrap([&] {
    const auto config = zsrg::load_experiment_config(config_path);
    const auto test_z = test->impl.filter_by_target_category(category);
    if (test_z.records().empty()) {
      throw zsrg::Error(zsrg::ErrorCode::kInvalid,
                        std::string("no test targets with category '") +
                            category + "'");
    }

    // expressions from zsrg_generate_to_file, parallel to test_z
    std::vector<zsrg::Utterance> utterances;
    std::istringstream in(zsrg::read_file(expressions_path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ordered_json j;
      try {
        j = ordered_json::parse(line);
      } catch (const std::exception& e) {
        throw zsrg::Error(zsrg::ErrorCode::kParse,
                          "line " + std::to_string(line_no) + ": " + e.what());
      }
      const std::size_t i = utterances.size();
      if (i >= test_z.records().size()) {
        throw zsrg::Error(zsrg::ErrorCode::kInvalid,
                          "more expressions than test records");
      }
      const auto& rec = test_z.records()[i];
      if (j.value("scene_id", "") != rec.scene.id ||
          j.value("target_id", "") != rec.target_id) {
        throw zsrg::Error(zsrg::ErrorCode::kInvalid,
                          "line " + std::to_string(line_no) +
                              ": expression does not match test record order");
      }
      zsrg::Utterance u;
      u.tokens = j.at("tokens").get<std::vector<zsrg::Token>>();
      u.terminated = j.value("terminated", true);
      utterances.push_back(std::move(u));
    }
    if (utterances.size() != test_z.records().size()) {
      throw zsrg::Error(zsrg::ErrorCode::kInvalid,
                        "expression count does not match test records");
    }

    const auto lexicon =
        zsrg::build_noun_lexicon(test->impl.categories(), config.synonyms);
    const auto nouns = zsrg::noun_metrics(utterances, lexicon, category);

    std::vector<zsrg::Scene> ts_image;
    ts_image.reserve(test_z.records().size());
    for (const auto& rec : test_z.records()) ts_image.push_back(rec.scene);
    const auto ts_distr = zsrg::build_ts_distractors(
        test_z, config.similar, config.ts_distractors_k,
        zsrg::derive_seed(config.seed, std::string("ts-distractors/") + category));

    ordered_json j;
    j["category"] = category;
    j["n"] = nouns.n;
    j["distr_noun_rate"] = nouns.distr_noun_rate;
    j["no_noun_rate"] = nouns.no_noun_rate;
    j["acc_ts_image"] = zsrg::resolution_accuracy(
        ts_image, utterances, s_eval->impl, table_full->impl, lexicon);
    j["acc_ts_distractors"] = zsrg::resolution_accuracy(
        ts_distr, utterances, s_eval->impl, table_full->impl, lexicon);
    zsrg::write_file(out_path, j.dump(2) + "\n");
  });
}

/* ---- experiment -------------------------------------------------------- */

int zsrg_run_experiment(const char* config_path, int has_seed_override,
                        uint64_t seed_override, const char* out_dir,
                        const char* formats, zsrg_report** out) {
  if (!config_path) return invalid("null argument");
  return wrap([&] {
    auto config = zsrg::load_experiment_config(config_path);
    if (has_seed_override) {
      config.seed = seed_override;
      if (config.world) config.world->seed = seed_override;
    }
    const std::string dir = out_dir ? out_dir : config.output_dir;
    const auto report = zsrg::run_experiment(config);

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      throw zsrg::Error(zsrg::ErrorCode::kIo,
                        "cannot create '" + dir + "': " + ec.message());
    }
    std::stringstream list(formats ? formats : "json");
    std::string fmt;
    while (std::getline(list, fmt, ',')) {
      if (fmt.empty()) continue;
      const auto format = zsrg::report_format_from_string(fmt);
      const char* ext = format == zsrg::ReportFormat::kJson  ? "json"
                        : format == zsrg::ReportFormat::kCsv ? "csv"
                                                             : "md";
      zsrg::emit_report(
          report,
          (std::filesystem::path(dir) / (std::string("report.") + ext)).string(),
          format);
    }
    if (out) *out = new zsrg_report{report};
  });
}

int zsrg_report_load(const char* path, zsrg_report** out) {
  if (!path || !out) return invalid("null argument");
  return wrap([&] { *out = new zsrg_report{zsrg::load_report(path)}; });
}

int zsrg_report_emit(const zsrg_report* report, const char* path,
                     const char* format) {
  if (!report || !path || !format) return invalid("null argument");
  return wrap([&] {
    zsrg::emit_report(report->impl, path, zsrg::report_format_from_string(format));
  });
}

void zsrg_report_free(zsrg_report* report) { delete report; }

}  // extern "C"
