#ifndef ZSRG_EXPERIMENT_HPP
#define ZSRG_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zsrg/corpus.hpp"
#include "zsrg/evaluation.hpp"
#include "zsrg/pragmatics.hpp"
#include "zsrg/speaker.hpp"
#include "zsrg/worldgen.hpp"

namespace zsrg {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Full experiment configuration. Exactly one corpus source: an inline world
// config or a path to a corpus JSONL file.
struct ExperimentConfig {
  std::optional<WorldConfig> world;
  std::optional<std::string> corpus_path;
  std::vector<CategoryId> zero_shot_categories;
  SimilarCategoryMap similar;
  std::map<CategoryId, std::vector<Token>> synonyms;
  DecodeParams decode;
  FeatureRule feature_rule;
  double smoothing_k = 0.1;
  BeliefMode belief_mode = BeliefMode::kUniform;
  // per-category probabilities, required iff belief_mode is custom;
  // categories missing from the map get probability 0
  std::map<CategoryId, double> custom_belief;
  std::size_t ts_distractors_k = 4;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct SpeakerMetrics {
  NounMetrics nouns;
  double acc_ts_image = 0.0;
  double acc_ts_distractors = 0.0;

  bool operator==(const SpeakerMetrics&) const = default;
};

struct CategoryResult {
  CategoryId category;
  SpeakerMetrics s0;
  SpeakerMetrics s1;

  bool operator==(const CategoryResult&) const = default;
};

struct ExperimentReport {
  std::string artifact_version;
  std::string generated_at;  // ISO 8601 UTC; the only non-deterministic field
  std::uint64_t seed = 0;
  std::string config_echo;  // canonical JSON of the resolved config
  std::vector<CategoryResult> results;

  bool operator==(const ExperimentReport&) const = default;
};

// Runs the full protocol once per zero-shot category:
//   acquire corpus -> split on the category -> estimate the word-category
//   table and train S0 on the train half -> decode S0 (greedy) and S1
//   (pragmatic) expressions for every test record whose target has the
//   zero-shot category -> noun metrics -> TS-image (original scenes) and
//   TS-distractors resolution accuracy against S_eval and the full-corpus
//   table. Deterministic per (config, seed); errors carry category and
//   stage context.
ExperimentReport run_experiment(const ExperimentConfig& config);

enum class ReportFormat { kJson, kCsv, kMarkdown };
ReportFormat report_format_from_string(const std::string& s);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);
// csv header: category,speaker,distr_noun_rate,no_noun_rate,acc_ts_image,acc_ts_distractors
std::string report_to_csv(const ExperimentReport& report);
std::string report_to_markdown(const ExperimentReport& report);

void emit_report(const ExperimentReport& report, const std::string& path,
                 ReportFormat format);
ExperimentReport load_report(const std::string& path);

}  // namespace zsrg

#endif  // ZSRG_EXPERIMENT_HPP
