// zsrg command-line driver. Deliberately built against the public C API
// only (zsrg.h + libzsrg), so it doubles as a smoke test of the shared
// library surface.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zsrg.h"

namespace {

int fail(int code) {
  std::fprintf(stderr, "error: %s\n", zsrg_last_error());
  return code == ZSRG_OK ? 1 : code;
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

struct CorpusHandle {
  zsrg_corpus* ptr = nullptr;
  ~CorpusHandle() { zsrg_corpus_free(ptr); }
};
struct SpeakerHandle {
  zsrg_speaker* ptr = nullptr;
  ~SpeakerHandle() { zsrg_speaker_free(ptr); }
};
struct TableHandle {
  zsrg_table* ptr = nullptr;
  ~TableHandle() { zsrg_table_free(ptr); }
};
struct ReportHandle {
  zsrg_report* ptr = nullptr;
  ~ReportHandle() { zsrg_report_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-shot reference game simulator"};
  app.set_version_flag("--version", std::string(zsrg_version()));
  app.require_subcommand(1);

  // gen-world
  std::string gw_config, gw_out;
  std::uint64_t gw_seed = 0;
  bool gw_has_seed = false;
  auto* gen_world = app.add_subcommand(
      "gen-world", "generate a synthetic corpus from the config's world section");
  gen_world->add_option("--config", gw_config, "experiment config file")->required();
  gen_world->add_option("--out", gw_out, "output corpus JSONL")->required();
  gen_world->add_option("--seed", gw_seed, "override the world seed")
      ->each([&](const std::string&) { gw_has_seed = true; });

  // split
  std::string sp_corpus, sp_train, sp_test;
  std::vector<std::string> sp_categories;
  auto* split = app.add_subcommand("split", "zero-shot train/test split");
  split->add_option("--corpus", sp_corpus, "corpus JSONL")->required();
  split->add_option("--categories", sp_categories, "zero-shot categories")
      ->required()
      ->delimiter(',');
  split->add_option("--out-train", sp_train, "train half JSONL")->required();
  split->add_option("--out-test", sp_test, "test half JSONL")->required();

  // train
  std::string tr_corpus, tr_speaker_out, tr_table_out;
  double tr_k = 0.1;
  bool tr_no_category = false;
  std::vector<std::string> tr_attributes;
  auto* train = app.add_subcommand(
      "train", "train the literal speaker and the word-category table");
  train->add_option("--corpus", tr_corpus, "training corpus JSONL")->required();
  train->add_option("--k", tr_k, "add-k smoothing constant");
  train->add_flag("--no-category", tr_no_category,
                  "exclude the category from the conditioning bucket");
  train->add_option("--attributes", tr_attributes,
                    "attribute names fed into the conditioning bucket")
      ->delimiter(',');
  train->add_option("--out-speaker", tr_speaker_out, "speaker artifact path")
      ->required();
  train->add_option("--out-table", tr_table_out, "table artifact path");

  // generate
  std::string ge_speaker, ge_table, ge_corpus, ge_category, ge_mode = "s0";
  std::string ge_belief = "uniform", ge_out;
  zsrg_decode_params ge_params;
  zsrg_decode_params_init(&ge_params);
  auto* generate = app.add_subcommand(
      "generate", "decode expressions for the targets of a corpus");
  generate->add_option("--speaker", ge_speaker, "speaker artifact")->required();
  generate->add_option("--table", ge_table, "word-category table artifact");
  generate->add_option("--corpus", ge_corpus, "target corpus JSONL")->required();
  generate->add_option("--category", ge_category,
                       "only decode records with this target category");
  generate->add_option("--mode", ge_mode, "s0 (greedy literal) or s1 (pragmatic)")
      ->check(CLI::IsMember({"s0", "s1"}));
  generate->add_option("--belief", ge_belief, "uniform or oracle")
      ->check(CLI::IsMember({"uniform", "oracle"}));
  generate->add_option("--alpha", ge_params.alpha, "listener exponent");
  generate->add_option("--beta", ge_params.beta_repeat, "repeat-word exponent");
  generate->add_option("--max-len", ge_params.max_len, "maximum tokens");
  generate->add_option("--out", ge_out, "output expressions JSONL")->required();

  // eval
  std::string ev_config, ev_corpus, ev_expr, ev_speaker, ev_table, ev_category,
      ev_out;
  auto* eval = app.add_subcommand(
      "eval", "noun metrics and resolution accuracy for generated expressions");
  eval->add_option("--config", ev_config, "experiment config file")->required();
  eval->add_option("--corpus", ev_corpus, "test corpus JSONL")->required();
  eval->add_option("--expressions", ev_expr, "expressions JSONL from 'generate'")
      ->required();
  eval->add_option("--eval-speaker", ev_speaker, "full-corpus speaker artifact")
      ->required();
  eval->add_option("--eval-table", ev_table, "full-corpus table artifact")
      ->required();
  eval->add_option("--category", ev_category, "zero-shot category")->required();
  eval->add_option("--out", ev_out, "output metrics JSON")->required();

  // run
  std::string rn_config, rn_out, rn_format = "json,csv,md";
  std::uint64_t rn_seed = 0;
  bool rn_has_seed = false;
  auto* run = app.add_subcommand("run", "run the full experiment pipeline");
  run->add_option("--config", rn_config, "experiment config file")->required();
  run->add_option("--seed", rn_seed, "override the config seed")
      ->each([&](const std::string&) { rn_has_seed = true; });
  run->add_option("--out", rn_out, "output directory (default: config output_dir)");
  run->add_option("--format", rn_format, "comma list of json,csv,md");

  // report
  std::string rp_in, rp_out, rp_format = "md";
  auto* report = app.add_subcommand("report", "re-emit a stored report");
  report->add_option("--in", rp_in, "report JSON")->required();
  report->add_option("--format", rp_format, "json, csv or md")
      ->check(CLI::IsMember({"json", "csv", "md", "markdown"}));
  report->add_option("--out", rp_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen_world->parsed()) {
    CorpusHandle corpus;
    int rc = zsrg_corpus_generate(gw_config.c_str(), gw_has_seed ? 1 : 0, gw_seed,
                                  &corpus.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    rc = zsrg_corpus_save(corpus.ptr, gw_out.c_str());
    if (rc != ZSRG_OK) return fail(rc);
    std::printf("wrote %zu records (%zu categories, %zu words) to %s\n",
                zsrg_corpus_record_count(corpus.ptr),
                zsrg_corpus_category_count(corpus.ptr),
                zsrg_corpus_vocab_size(corpus.ptr), gw_out.c_str());
    return 0;
  }

  if (split->parsed()) {
    CorpusHandle corpus, train_half, test_half;
    int rc = zsrg_corpus_load(sp_corpus.c_str(), &corpus.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    const auto cats = c_strings(sp_categories);
    rc = zsrg_corpus_split(corpus.ptr, cats.data(), cats.size(), &train_half.ptr,
                           &test_half.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    rc = zsrg_corpus_save(train_half.ptr, sp_train.c_str());
    if (rc != ZSRG_OK) return fail(rc);
    rc = zsrg_corpus_save(test_half.ptr, sp_test.c_str());
    if (rc != ZSRG_OK) return fail(rc);
    std::printf("train: %zu records, test: %zu records\n",
                zsrg_corpus_record_count(train_half.ptr),
                zsrg_corpus_record_count(test_half.ptr));
    return 0;
  }

  if (train->parsed()) {
    CorpusHandle corpus;
    int rc = zsrg_corpus_load(tr_corpus.c_str(), &corpus.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    SpeakerHandle speaker;
    const auto attrs = c_strings(tr_attributes);
    rc = zsrg_speaker_train(corpus.ptr, tr_k, tr_no_category ? 0 : 1, attrs.data(),
                            attrs.size(), &speaker.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    rc = zsrg_speaker_save(speaker.ptr, tr_speaker_out.c_str());
    if (rc != ZSRG_OK) return fail(rc);
    if (!tr_table_out.empty()) {
      TableHandle table;
      rc = zsrg_table_estimate(corpus.ptr, tr_k, &table.ptr);
      if (rc != ZSRG_OK) return fail(rc);
      rc = zsrg_table_save(table.ptr, tr_table_out.c_str());
      if (rc != ZSRG_OK) return fail(rc);
    }
    return 0;
  }

  if (generate->parsed()) {
    SpeakerHandle speaker;
    int rc = zsrg_speaker_load(ge_speaker.c_str(), &speaker.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    TableHandle table;
    if (!ge_table.empty()) {
      rc = zsrg_table_load(ge_table.c_str(), &table.ptr);
      if (rc != ZSRG_OK) return fail(rc);
    }
    CorpusHandle corpus;
    rc = zsrg_corpus_load(ge_corpus.c_str(), &corpus.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    rc = zsrg_generate_to_file(
        speaker.ptr, table.ptr, corpus.ptr,
        ge_category.empty() ? nullptr : ge_category.c_str(),
        ge_mode == "s0" ? ZSRG_SPEAKER_S0 : ZSRG_SPEAKER_S1, ge_belief.c_str(),
        &ge_params, ge_out.c_str());
    if (rc != ZSRG_OK) return fail(rc);
    return 0;
  }

  if (eval->parsed()) {
    CorpusHandle corpus;
    int rc = zsrg_corpus_load(ev_corpus.c_str(), &corpus.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    SpeakerHandle speaker;
    rc = zsrg_speaker_load(ev_speaker.c_str(), &speaker.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    TableHandle table;
    rc = zsrg_table_load(ev_table.c_str(), &table.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    rc = zsrg_eval_to_file(ev_config.c_str(), corpus.ptr, ev_expr.c_str(),
                           speaker.ptr, table.ptr, ev_category.c_str(),
                           ev_out.c_str());
    if (rc != ZSRG_OK) return fail(rc);
    return 0;
  }

  if (run->parsed()) {
    int rc = zsrg_run_experiment(rn_config.c_str(), rn_has_seed ? 1 : 0, rn_seed,
                                 rn_out.empty() ? nullptr : rn_out.c_str(),
                                 rn_format.c_str(), nullptr);
    if (rc != ZSRG_OK) return fail(rc);
    return 0;
  }

  if (report->parsed()) {
    ReportHandle rep;
    int rc = zsrg_report_load(rp_in.c_str(), &rep.ptr);
    if (rc != ZSRG_OK) return fail(rc);
    rc = zsrg_report_emit(rep.ptr, rp_out.c_str(), rp_format.c_str());
    if (rc != ZSRG_OK) return fail(rc);
    return 0;
  }

  return 0;
}
