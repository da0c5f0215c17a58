#ifndef ZSRG_PRAGMATICS_HPP
#define ZSRG_PRAGMATICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "zsrg/corpus.hpp"
#include "zsrg/speaker.hpp"
#include "zsrg/types.hpp"

namespace zsrg {

// Listener belief P(c|r) over a category inventory.
class CategoryBelief {
 public:
  static CategoryBelief uniform(std::vector<CategoryId> categories);
  static CategoryBelief one_hot(std::vector<CategoryId> categories,
                                const CategoryId& category);
  // Validates the simplex invariant: nonnegative, sums to 1 +- 1e-9.
  static CategoryBelief custom(std::vector<CategoryId> categories,
                               std::vector<double> probs);
  // No validation; for fixtures that use raw (unnormalized) weights.
  static CategoryBelief from_raw_weights_unchecked(
      std::vector<CategoryId> categories, std::vector<double> weights);

  const std::vector<CategoryId>& categories() const { return categories_; }
  const std::vector<double>& probs() const { return probs_; }
  double prob(const CategoryId& c) const;

 private:
  std::vector<CategoryId> categories_;
  std::vector<double> probs_;
};

enum class BeliefMode { kUniform, kOracle, kCustom };

BeliefMode belief_mode_from_string(const std::string& s);
std::string belief_mode_to_string(BeliefMode m);

// uniform: 1/|C| each; oracle: one-hot on the referent's ground-truth
// category; custom: validated copy of `custom` (required iff mode=custom).
CategoryBelief make_category_belief(
    BeliefMode mode, const Referent& referent,
    const std::vector<CategoryId>& inventory,
    const std::optional<std::vector<double>>& custom = std::nullopt);

struct DecodeParams {
  double alpha = 2.0;
  double beta_repeat = 2.0;
  std::size_t max_len = 10;
  // clamp for listener scores before exponentiation; guards against zero
  // scores when a caller disables smoothing
  double listener_floor = 1e-9;

  void validate() const;
  bool operator==(const DecodeParams&) const = default;
};

// Category-marginal word score: sum_c P(c|r) * P(word|c). Deliberately kept
// as the raw (unnormalized) marginal. Words outside the table vocabulary
// take the table's smoothed OOV floor.
double word_listener_score(const WordCategoryTable& table,
                           const CategoryBelief& belief, const Token& word);

// Per-word listener scores aligned with a speaker's vocabulary + EOS slot.
// EOS is assigned the neutral score 1.
std::vector<double> listener_scores_for_vocab(const WordCategoryTable& table,
                                              const CategoryBelief& belief,
                                              const Vocabulary& vocab);

// One incremental pragmatic-speaker step:
//   score(w) = s0(w) * max(listener(w), floor)^(alpha + beta(w))
// beta(w) = beta_repeat when w already occurs in the prefix, else 0; the
// EOS slot keeps its neutral listener score of 1. Inputs are aligned with
// `vocab` + EOS (both of size vocab.size() + 1).
std::vector<double> s1_next_word_scores(const std::vector<double>& s0_dist,
                                        const std::vector<double>& listener_scores,
                                        const Vocabulary& vocab,
                                        const Utterance& prefix,
                                        const DecodeParams& params);

// Greedy incremental pragmatic decoding: at each step rescore the literal
// speaker's next-word distribution by the category-marginal listener and
// emit the argmax (ties -> lowest word id; word/EOS ties keep the word).
Utterance s1_decode(const LiteralSpeaker& speaker, const WordCategoryTable& table,
                    const CategoryBelief& belief, const Referent& referent,
                    const DecodeParams& params);

// Utterance-level pragmatic speaker score:
//   S0(u|r) * (prod_w listener(w))^alpha
// with S0(u|r) = exp(utterance_log_prob) and the listener product over word
// tokens (bag-of-words utterance extension of the word-level marginal).
double s1_utterance_score(const LiteralSpeaker& speaker,
                          const WordCategoryTable& table,
                          const CategoryBelief& belief, const Referent& referent,
                          const Utterance& utterance, double alpha);

// Baseline listener over a scene's referents:
//   L0(r|u) = S0(u|r) P(r) / sum_r' S0(u|r') P(r')
// P(r) from the scene's referent_prior (uniform when absent).
std::vector<double> standard_rsa_listener(const LiteralSpeaker& speaker,
                                          const Scene& scene,
                                          const Utterance& utterance);

}  // namespace zsrg

#endif  // ZSRG_PRAGMATICS_HPP
