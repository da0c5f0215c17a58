#ifndef ZSRG_WORLDGEN_HPP
#define ZSRG_WORLDGEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zsrg/corpus.hpp"

namespace zsrg {

// A category in a synthetic world. fixed_attributes are deterministic
// per-category features (e.g. a coarse visual kind shared by lookalike
// categories); drawn attributes come from WorldConfig::attributes.
struct CategoryDef {
  CategoryId id;
  std::map<std::string, std::string> fixed_attributes;

  bool operator==(const CategoryDef&) const = default;
};

struct AttributeDef {
  std::string name;
  std::vector<std::string> values;

  bool operator==(const AttributeDef&) const = default;
};

// "{position} {color} {name}" -> tokens; {name} realizes the target's
// category id, {attr} realizes the target's attribute value, anything else
// is a literal token.
struct ExpressionTemplate {
  std::string pattern;
  std::uint32_t weight = 1;

  bool operator==(const ExpressionTemplate&) const = default;
};

struct WorldConfig {
  std::vector<CategoryDef> categories;
  std::vector<AttributeDef> attributes;
  std::vector<ExpressionTemplate> templates;
  std::uint32_t scenes_per_category = 1;
  std::uint32_t min_referents = 2;
  std::uint32_t max_referents = 4;
  // probability of dropping an optional (attribute) token from a realized
  // expression; applied per token with an integer draw
  double noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const WorldConfig&) const = default;
};

// Deterministic synthetic reference-game corpus: same config (including
// seed) gives a byte-identical corpus. A single SplitMix64 stream is drawn
// in a documented order (see worldgen.cpp); only integer draws are used.
// Scenes are built per category in config order; every scene's referents
// are pairwise distinguishable by category or by at least one attribute;
// expressions are template realizations for the scene's target with the
// category id as head noun.
RefExCorpus generate_world(const WorldConfig& config);

}  // namespace zsrg

#endif  // ZSRG_WORLDGEN_HPP
