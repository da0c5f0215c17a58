#include "zsrg/pragmatics.hpp"

#include <algorithm>
#include <cmath>

namespace zsrg {

namespace {

void check_simplex(const std::vector<double>& probs, std::size_t expected) {
  if (probs.size() != expected) {
    throw Error(ErrorCode::kInvalid, "belief length does not match inventory");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw Error(ErrorCode::kInvalid, "belief has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalid, "belief does not sum to 1");
  }
}

}  // namespace

CategoryBelief CategoryBelief::uniform(std::vector<CategoryId> categories) {
  if (categories.empty()) {
    throw Error(ErrorCode::kInvalid, "belief over an empty inventory");
  }
  CategoryBelief b;
  b.probs_.assign(categories.size(), 1.0 / static_cast<double>(categories.size()));
  b.categories_ = std::move(categories);
  return b;
}

CategoryBelief CategoryBelief::one_hot(std::vector<CategoryId> categories,
                                       const CategoryId& category) {
  const auto it = std::find(categories.begin(), categories.end(), category);
  if (it == categories.end()) {
    throw Error(ErrorCode::kInvalid,
                "one-hot category '" + category + "' not in inventory");
  }
  CategoryBelief b;
  b.probs_.assign(categories.size(), 0.0);
  b.probs_[static_cast<std::size_t>(it - categories.begin())] = 1.0;
  b.categories_ = std::move(categories);
  return b;
}

CategoryBelief CategoryBelief::custom(std::vector<CategoryId> categories,
                                      std::vector<double> probs) {
  check_simplex(probs, categories.size());
  CategoryBelief b;
  b.categories_ = std::move(categories);
  b.probs_ = std::move(probs);
  return b;
}

CategoryBelief CategoryBelief::from_raw_weights_unchecked(
    std::vector<CategoryId> categories, std::vector<double> weights) {
  if (weights.size() != categories.size()) {
    throw Error(ErrorCode::kInvalid, "weight length does not match inventory");
  }
  CategoryBelief b;
  b.categories_ = std::move(categories);
  b.probs_ = std::move(weights);
  return b;
}

double CategoryBelief::prob(const CategoryId& c) const {
  const auto it = std::find(categories_.begin(), categories_.end(), c);
  if (it == categories_.end()) {
    throw Error(ErrorCode::kInvalid, "category '" + c + "' not in belief");
  }
  return probs_[static_cast<std::size_t>(it - categories_.begin())];
}

BeliefMode belief_mode_from_string(const std::string& s) {
  if (s == "uniform") return BeliefMode::kUniform;
  if (s == "oracle") return BeliefMode::kOracle;
  if (s == "custom") return BeliefMode::kCustom;
  throw Error(ErrorCode::kInvalid, "unknown belief mode '" + s + "'");
}

std::string belief_mode_to_string(BeliefMode m) {
  switch (m) {
    case BeliefMode::kUniform: return "uniform";
    case BeliefMode::kOracle: return "oracle";
    case BeliefMode::kCustom: return "custom";
  }
  throw Error(ErrorCode::kInternal, "bad belief mode");
}

CategoryBelief make_category_belief(BeliefMode mode, const Referent& referent,
                                    const std::vector<CategoryId>& inventory,
                                    const std::optional<std::vector<double>>& custom) {
  if ((mode == BeliefMode::kCustom) != custom.has_value()) {
    throw Error(ErrorCode::kInvalid,
                "a custom distribution is required iff mode is custom");
  }
  switch (mode) {
    case BeliefMode::kUniform:
      return CategoryBelief::uniform(inventory);
    case BeliefMode::kOracle:
      return CategoryBelief::one_hot(inventory, referent.category);
    case BeliefMode::kCustom:
      return CategoryBelief::custom(inventory, *custom);
  }
  throw Error(ErrorCode::kInternal, "bad belief mode");
}

void DecodeParams::validate() const {
  if (alpha < 0.0 || beta_repeat < 0.0) {
    throw Error(ErrorCode::kInvalid, "alpha and beta_repeat must be nonnegative");
  }
  if (max_len < 1) {
    throw Error(ErrorCode::kInvalid, "max_len must be at least 1");
  }
  if (listener_floor <= 0.0) {
    throw Error(ErrorCode::kInvalid, "listener_floor must be positive");
  }
}

double word_listener_score(const WordCategoryTable& table,
                           const CategoryBelief& belief, const Token& word) {
  const auto& cats = belief.categories();
  if (cats.size() != table.categories().size()) {
    throw Error(ErrorCode::kInvalid, "belief and table inventories differ");
  }
  double score = 0.0;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    score += belief.probs()[i] * table.prob(word, cats[i]);
  }
  return score;
}

std::vector<double> listener_scores_for_vocab(const WordCategoryTable& table,
                                              const CategoryBelief& belief,
                                              const Vocabulary& vocab) {
  std::vector<double> scores(vocab.size() + 1, 1.0);  // EOS slot stays neutral
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    scores[w] = word_listener_score(table, belief, vocab.token(w));
  }
  return scores;
}

std::vector<double> s1_next_word_scores(const std::vector<double>& s0_dist,
                                        const std::vector<double>& listener_scores,
                                        const Vocabulary& vocab,
                                        const Utterance& prefix,
                                        const DecodeParams& params) {
  if (s0_dist.size() != vocab.size() + 1 ||
      listener_scores.size() != vocab.size() + 1) {
    throw Error(ErrorCode::kInvalid,
                "s0 distribution and listener scores must cover vocabulary + EOS");
  }
  params.validate();
  std::vector<double> scores(s0_dist.size());
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    const double beta =
        prefix.contains(vocab.token(w)) ? params.beta_repeat : 0.0;
    const double listener = std::max(listener_scores[w], params.listener_floor);
    scores[w] = s0_dist[w] * std::pow(listener, params.alpha + beta);
  }
  // EOS: neutral listener score of 1, so the exponent leaves it at S0's mass.
  scores[vocab.size()] = s0_dist[vocab.size()];
  return scores;
}

Utterance s1_decode(const LiteralSpeaker& speaker, const WordCategoryTable& table,
                    const CategoryBelief& belief, const Referent& referent,
                    const DecodeParams& params) {
  params.validate();
  const auto listener = listener_scores_for_vocab(table, belief, speaker.vocabulary());
  Utterance out;
  while (out.tokens.size() < params.max_len) {
    const auto s0 = speaker.next_word_dist(referent, out);
    const auto scores =
        s1_next_word_scores(s0, listener, speaker.vocabulary(), out, params);
    std::size_t best = 0;
    for (std::size_t w = 1; w < scores.size(); ++w) {
      if (scores[w] > scores[best]) best = w;
    }
    if (best == speaker.eos_id()) {
      out.terminated = true;
      break;
    }
    out.tokens.push_back(speaker.vocabulary().token(best));
  }
  return out;
}

double s1_utterance_score(const LiteralSpeaker& speaker,
                          const WordCategoryTable& table,
                          const CategoryBelief& belief, const Referent& referent,
                          const Utterance& utterance, double alpha) {
  if (utterance.tokens.empty()) {
    throw Error(ErrorCode::kInvalid, "utterance-level score of an empty utterance");
  }
  double listener_product = 1.0;
  for (const auto& tok : utterance.tokens) {
    listener_product *= word_listener_score(table, belief, tok);
  }
  return std::exp(speaker.utterance_log_prob(referent, utterance)) *
         std::pow(listener_product, alpha);
}

std::vector<double> standard_rsa_listener(const LiteralSpeaker& speaker,
                                          const Scene& scene,
                                          const Utterance& utterance) {
  if (scene.referents.empty()) {
    throw Error(ErrorCode::kInvalid, "listener over an empty scene");
  }
  scene.validate();
  std::vector<double> probs(scene.referents.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scene.referents.size(); ++i) {
    const double prior = scene.referent_prior.empty()
                             ? 1.0 / static_cast<double>(scene.referents.size())
                             : scene.referent_prior[i];
    probs[i] = std::exp(speaker.utterance_log_prob(scene.referents[i], utterance)) *
               prior;
    total += probs[i];
  }
  if (total <= 0.0) {
    // all-zero mass is only reachable with k = 0 and an all-zero prior row
    throw Error(ErrorCode::kInvalid, "listener normalizer is zero");
  }
  for (auto& p : probs) p /= total;
  return probs;
}

}  // namespace zsrg
