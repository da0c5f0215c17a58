#ifndef ZSRG_SPEAKER_HPP
#define ZSRG_SPEAKER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "zsrg/corpus.hpp"
#include "zsrg/types.hpp"

namespace zsrg {

// Sorted token inventory with stable integer ids. Ids order tokens
// lexicographically; ties anywhere in decoding break toward the lowest id.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<Token> sorted_tokens);

  std::size_t size() const { return tokens_.size(); }
  const Token& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<Token>& tokens() const { return tokens_; }
  std::optional<std::size_t> id(const Token& t) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<Token> tokens_;
  std::unordered_map<Token, std::size_t> index_;
};

// Which referent features feed the conditioning key of the literal speaker.
struct FeatureRule {
  bool use_category = true;
  std::vector<std::string> attributes;

  bool operator==(const FeatureRule&) const = default;
};

// Tabular literal speaker S0: a next-word model conditioned on a referent
// feature bucket and the previous token, with back-off. The conditioning
// chain, most to least specific:
//   1. (category + attribute values, prev)
//   2. (attribute values, prev)         -- category dropped
//   3. (prev)
//   4. ()                               -- unigram
// A query uses the most specific level whose key has any count. Level 2
// exists only when the rule uses the category and names at least one
// attribute; it is what lets the model keep producing feature-appropriate
// words for referents of categories never seen in training.
//
// Distributions are add-k smoothed over vocabulary + EOS. Words outside the
// vocabulary map to the reserved OOV token and score the smoothed floor
// k / (total + k * (|V| + 1)).
class LiteralSpeaker {
 public:
  LiteralSpeaker() = default;

  // Throws Error(kInvalid) on an empty corpus.
  static LiteralSpeaker train(const RefExCorpus& train, double smoothing_k,
                              const FeatureRule& rule);

  // P(next token | referent, last token of prefix), over vocabulary + EOS.
  // Index eos_id() is the EOS probability. Throws on a terminated prefix.
  std::vector<double> next_word_dist(const Referent& referent,
                                     const Utterance& prefix) const;

  // Probability of one token (or EOS / an out-of-vocabulary token) in the
  // same conditional distribution, without materializing the vector.
  double step_prob(const Referent& referent, const Token& prev,
                   const Token& next) const;
  double eos_step_prob(const Referent& referent, const Token& prev) const;

  // Greedy argmax decode; ties break toward the lowest word id, and a
  // word/EOS tie keeps the word. Stops at EOS (terminated=true) or at
  // max_len (terminated=false).
  Utterance decode_greedy(const Referent& referent, std::size_t max_len) const;

  // Sum of per-step log probabilities, including the EOS step when the
  // utterance is terminated. Finite for smoothing_k > 0.
  double utterance_log_prob(const Referent& referent,
                            const Utterance& utterance) const;

  const Vocabulary& vocabulary() const { return vocab_; }
  std::size_t eos_id() const { return vocab_.size(); }
  double smoothing_k() const { return smoothing_k_; }
  const FeatureRule& feature_rule() const { return rule_; }

  std::string feature_bucket(const Referent& r, bool with_category) const;

  std::string to_json() const;
  static LiteralSpeaker from_json(const std::string& text);
  void save(const std::string& path) const;
  static LiteralSpeaker load(const std::string& path);

 private:
  struct Row {
    std::unordered_map<std::size_t, std::int64_t> counts;  // word id / eos id
    std::int64_t total = 0;
  };
  using Level = std::unordered_map<std::string, Row>;

  const Row* find_row(const Referent& referent, const Token& prev_key) const;
  double row_prob(const Row& row, std::size_t outcome_id) const;
  double row_floor(const Row& row) const;
  Token prev_token_key(const Utterance& prefix) const;

  Vocabulary vocab_;
  double smoothing_k_ = 0.1;
  FeatureRule rule_;
  bool has_attr_level_ = false;
  Level bucket_level_;  // (category+attrs, prev)
  Level attrs_level_;   // (attrs, prev)
  Level prev_level_;    // (prev)
  Row unigram_;
};

}  // namespace zsrg

#endif  // ZSRG_SPEAKER_HPP
