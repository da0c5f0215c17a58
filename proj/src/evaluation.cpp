#include "zsrg/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "zsrg/rng.hpp"

namespace zsrg {

SimilarCategoryMap::SimilarCategoryMap(
    std::map<CategoryId, std::vector<CategoryId>> map)
    : map_(std::move(map)) {}

const std::vector<CategoryId>& SimilarCategoryMap::pool(
    const CategoryId& target) const {
  const auto it = map_.find(target);
  if (it == map_.end()) {
    throw Error(ErrorCode::kInvalid,
                "no similar-category pool for '" + target + "'");
  }
  return it->second;
}

bool SimilarCategoryMap::has(const CategoryId& target) const {
  return map_.count(target) > 0;
}

void SimilarCategoryMap::validate(const std::vector<CategoryId>& inventory) const {
  for (const auto& [target, pool] : map_) {
    if (pool.empty()) {
      throw Error(ErrorCode::kInvalid,
                  "similar-category pool for '" + target + "' is empty");
    }
    if (std::find(inventory.begin(), inventory.end(), target) == inventory.end()) {
      throw Error(ErrorCode::kInvalid,
                  "similar-category target '" + target + "' not in inventory");
    }
    for (const auto& c : pool) {
      if (c == target) {
        throw Error(ErrorCode::kInvalid,
                    "category '" + target + "' maps to itself");
      }
      if (std::find(inventory.begin(), inventory.end(), c) == inventory.end()) {
        throw Error(ErrorCode::kInvalid,
                    "similar category '" + c + "' not in inventory");
      }
    }
  }
}

std::optional<std::pair<Token, CategoryId>> extract_noun(
    const Utterance& utterance, const NounLexicon& lexicon) {
  for (const auto& tok : utterance.tokens) {
    if (!lexicon.is_noun(tok)) continue;
    // category_names is an ordered map, so the first owner found is the
    // lexicographically first category claiming the token
    for (const auto& [category, names] : lexicon.category_names) {
      if (names.count(tok) > 0) return std::make_pair(tok, category);
    }
  }
  return std::nullopt;
}

NounMetrics noun_metrics(const std::vector<Utterance>& utterances,
                         const NounLexicon& lexicon,
                         const CategoryId& zero_shot_category) {
  if (utterances.empty()) {
    throw Error(ErrorCode::kInvalid, "noun metrics over an empty list");
  }
  std::size_t distr = 0, none = 0;
  for (const auto& u : utterances) {
    const auto noun = extract_noun(u, lexicon);
    if (!noun) {
      ++none;
    } else if (noun->second != zero_shot_category) {
      ++distr;
    }
  }
  NounMetrics m;
  m.n = utterances.size();
  m.distr_noun_rate = static_cast<double>(distr) / static_cast<double>(m.n);
  m.no_noun_rate = static_cast<double>(none) / static_cast<double>(m.n);
  return m;
}

std::pair<std::string, std::vector<double>> eval_listener_resolve(
    const LiteralSpeaker& s_eval, const WordCategoryTable& table_full,
    const Scene& scene, const Utterance& utterance, const NounLexicon& lexicon) {
  if (scene.referents.empty()) {
    throw Error(ErrorCode::kInvalid, "resolve over an empty scene");
  }
  const auto noun = extract_noun(utterance, lexicon);
  std::vector<double> scores(scene.referents.size());
  std::size_t winner = 0;
  for (std::size_t i = 0; i < scene.referents.size(); ++i) {
    const auto& r = scene.referents[i];
    // name factor is 1 for noun-less utterances
    const double name_factor = noun ? table_full.prob(noun->first, r.category) : 1.0;
    scores[i] = std::exp(s_eval.utterance_log_prob(r, utterance)) * name_factor;
    if (scores[i] > scores[winner]) winner = i;  // ties keep the lowest index
  }
  return {scene.referents[winner].id, scores};
}

std::vector<Scene> build_ts_distractors(const RefExCorpus& test,
                                        const SimilarCategoryMap& similar,
                                        std::size_t k, std::uint64_t seed) {
  // pool of (scene, referent) pairs per category, in corpus order
  std::map<CategoryId, std::vector<std::pair<std::size_t, std::size_t>>> by_category;
  for (std::size_t si = 0; si < test.records().size(); ++si) {
    const auto& scene = test.records()[si].scene;
    for (std::size_t ri = 0; ri < scene.referents.size(); ++ri) {
      by_category[scene.referents[ri].category].emplace_back(si, ri);
    }
  }

  SplitMix64 rng(seed);
  std::vector<Scene> out;
  out.reserve(test.records().size());
  for (const auto& rec : test.records()) {
    const auto& target = rec.target();
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (const auto& c : similar.pool(target.category)) {
      const auto it = by_category.find(c);
      if (it != by_category.end()) {
        pool.insert(pool.end(), it->second.begin(), it->second.end());
      }
    }
    if (pool.size() < k) {
      throw Error(ErrorCode::kInvalid,
                  "only " + std::to_string(pool.size()) +
                      " similar-category referents available for '" +
                      target.category + "' (need " + std::to_string(k) + ")");
    }
    Scene scene;
    scene.id = rec.scene.id + "+distractors";
    Referent t = target;
    t.id = rec.scene.id + "/" + target.id;
    scene.referents.push_back(std::move(t));
    scene.target_index = 0;
    // partial Fisher-Yates: k draws without replacement
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t pick = j + rng.next_below(pool.size() - j);
      std::swap(pool[j], pool[pick]);
      const auto [si, ri] = pool[j];
      Referent d = test.records()[si].scene.referents[ri];
      d.id = test.records()[si].scene.id + "/" + d.id;
      scene.referents.push_back(std::move(d));
    }
    out.push_back(std::move(scene));
  }
  return out;
}

double resolution_accuracy(const std::vector<Scene>& scenes,
                           const std::vector<Utterance>& utterances,
                           const LiteralSpeaker& s_eval,
                           const WordCategoryTable& table_full,
                           const NounLexicon& lexicon) {
  if (scenes.empty()) {
    throw Error(ErrorCode::kInvalid, "resolution accuracy over an empty list");
  }
  if (scenes.size() != utterances.size()) {
    throw Error(ErrorCode::kInvalid, "scenes and utterances are not parallel");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto [winner, _] =
        eval_listener_resolve(s_eval, table_full, scenes[i], utterances[i], lexicon);
    if (winner == scenes[i].target().id) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scenes.size());
}

}  // namespace zsrg
