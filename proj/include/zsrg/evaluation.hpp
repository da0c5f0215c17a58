#ifndef ZSRG_EVALUATION_HPP
#define ZSRG_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zsrg/corpus.hpp"
#include "zsrg/speaker.hpp"
#include "zsrg/types.hpp"

namespace zsrg {

struct NounMetrics {
  double distr_noun_rate = 0.0;
  double no_noun_rate = 0.0;
  std::size_t n = 0;

  bool operator==(const NounMetrics&) const = default;
};

// Distractor pool per zero-shot category. A category never maps to itself.
class SimilarCategoryMap {
 public:
  SimilarCategoryMap() = default;
  explicit SimilarCategoryMap(std::map<CategoryId, std::vector<CategoryId>> map);

  const std::vector<CategoryId>& pool(const CategoryId& target) const;
  bool has(const CategoryId& target) const;
  const std::map<CategoryId, std::vector<CategoryId>>& map() const { return map_; }

  // Checks pools are nonempty, self-free, and inside the inventory.
  void validate(const std::vector<CategoryId>& inventory) const;

 private:
  std::map<CategoryId, std::vector<CategoryId>> map_;
};

// First token (left to right) that is a category name, with its owning
// category; nullopt when the utterance has none. A token claimed by several
// categories resolves to the lexicographically first one.
std::optional<std::pair<Token, CategoryId>> extract_noun(
    const Utterance& utterance, const NounLexicon& lexicon);

// distr_noun_rate: fraction of utterances whose extracted noun belongs to a
// category other than the zero-shot one. no_noun_rate: fraction with no
// extracted noun. Throws Error(kInvalid) on an empty list.
NounMetrics noun_metrics(const std::vector<Utterance>& utterances,
                         const NounLexicon& lexicon,
                         const CategoryId& zero_shot_category);

// Evaluation listener, applied per referent:
//   score(r) = S_eval(u|r) * P(n_u | category(r))
// where n_u is the extracted noun and the name factor is 1 when the
// utterance has no noun. Winner is the argmax; ties break toward the lowest
// referent index. Returns (winner id, per-referent scores).
std::pair<std::string, std::vector<double>> eval_listener_resolve(
    const LiteralSpeaker& s_eval, const WordCategoryTable& table_full,
    const Scene& scene, const Utterance& utterance, const NounLexicon& lexicon);

// For each record of `test`, a fresh scene pairing the record's target with
// k referents sampled without replacement from the pool of referents (over
// all of test's scenes) whose category is similar to the target's category.
// Deterministic per seed; a pool smaller than k is an error reported with
// the category. Sampled referents are re-identified as
// "<scene_id>/<referent_id>" and the target keeps index 0.
std::vector<Scene> build_ts_distractors(const RefExCorpus& test,
                                        const SimilarCategoryMap& similar,
                                        std::size_t k, std::uint64_t seed);

// Fraction of scenes where the evaluation listener's winner is the target.
// Lists must be parallel and nonempty.
double resolution_accuracy(const std::vector<Scene>& scenes,
                           const std::vector<Utterance>& utterances,
                           const LiteralSpeaker& s_eval,
                           const WordCategoryTable& table_full,
                           const NounLexicon& lexicon);

}  // namespace zsrg

#endif  // ZSRG_EVALUATION_HPP
