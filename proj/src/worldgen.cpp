#include "zsrg/worldgen.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>

#include "zsrg/rng.hpp"

namespace zsrg {

namespace {

struct TemplateSlot {
  enum Kind { kLiteral, kName, kAttribute } kind = kLiteral;
  std::string value;  // literal token or attribute name
};

std::vector<TemplateSlot> parse_template(const std::string& pattern) {
  std::vector<TemplateSlot> slots;
  std::istringstream in(pattern);
  std::string piece;
  while (in >> piece) {
    TemplateSlot slot;
    if (piece.size() >= 2 && piece.front() == '{' && piece.back() == '}') {
      const std::string inner = piece.substr(1, piece.size() - 2);
      if (inner == "name") {
        slot.kind = TemplateSlot::kName;
      } else {
        slot.kind = TemplateSlot::kAttribute;
        slot.value = inner;
      }
    } else {
      slot.kind = TemplateSlot::kLiteral;
      slot.value = piece;
    }
    slots.push_back(std::move(slot));
  }
  return slots;
}

// (category, drawn attribute values) signature used for the pairwise
// distinguishability check within a scene.
std::string referent_signature(const Referent& r,
                               const std::vector<AttributeDef>& attrs) {
  std::string sig = r.category;
  for (const auto& a : attrs) {
    sig += '\x1f';
    const auto it = r.attributes.find(a.name);
    sig += (it == r.attributes.end()) ? "" : it->second;
  }
  return sig;
}

}  // namespace

void WorldConfig::validate() const {
  if (categories.empty()) {
    throw Error(ErrorCode::kInvalid, "world config: no categories");
  }
  if (scenes_per_category < 1) {
    throw Error(ErrorCode::kInvalid, "world config: scenes_per_category < 1");
  }
  if (min_referents < 1 || max_referents < min_referents) {
    throw Error(ErrorCode::kInvalid, "world config: bad referent range");
  }
  if (noise < 0.0 || noise > 1.0) {
    throw Error(ErrorCode::kInvalid, "world config: noise outside [0,1]");
  }
  if (templates.empty()) {
    throw Error(ErrorCode::kInvalid, "world config: no expression templates");
  }
  std::set<std::string> seen_cats;
  std::set<std::string> attr_names;
  for (const auto& a : attributes) {
    if (a.values.empty()) {
      throw Error(ErrorCode::kInvalid,
                  "world config: attribute '" + a.name + "' has no values");
    }
    if (!attr_names.insert(a.name).second) {
      throw Error(ErrorCode::kInvalid,
                  "world config: duplicate attribute '" + a.name + "'");
    }
  }
  for (const auto& c : categories) {
    if (c.id.empty()) {
      throw Error(ErrorCode::kInvalid, "world config: empty category id");
    }
    if (!seen_cats.insert(c.id).second) {
      throw Error(ErrorCode::kInvalid,
                  "world config: duplicate category '" + c.id + "'");
    }
    for (const auto& [name, _] : c.fixed_attributes) {
      if (attr_names.count(name) > 0) {
        throw Error(ErrorCode::kInvalid,
                    "world config: fixed attribute '" + name +
                        "' collides with a drawn attribute");
      }
    }
  }
  std::uint64_t total_weight = 0;
  for (const auto& t : templates) {
    total_weight += t.weight;
    for (const auto& slot : parse_template(t.pattern)) {
      if (slot.kind == TemplateSlot::kAttribute && attr_names.count(slot.value) == 0) {
        throw Error(ErrorCode::kInvalid,
                    "world config: template '" + t.pattern +
                        "' references unknown attribute '" + slot.value + "'");
      }
    }
  }
  if (total_weight == 0) {
    throw Error(ErrorCode::kInvalid, "world config: all template weights zero");
  }
  // Distinct (category, drawn attributes) combinations bound the number of
  // mutually distinguishable referents a scene can hold.
  std::uint64_t combos = 1;
  for (const auto& a : attributes) combos *= a.values.size();
  combos *= categories.size();
  if (max_referents > combos) {
    throw Error(ErrorCode::kUnsatisfiable,
                "world config: max_referents exceeds the " +
                    std::to_string(combos) +
                    " distinct category/attribute combinations");
  }
}

// Draw order, per scene (single SplitMix64 stream over the whole corpus;
// categories in config order, scenes_per_category scenes each):
//   1. referent count n in [min_referents, max_referents]
//   2. target slot index in [0, n)
//   3. target drawn attributes, one value per attribute in config order
//   4. for each non-target slot in increasing index: category, then drawn
//      attributes as in 3, redrawn from scratch while the (category,
//      attributes) signature collides with an already-placed referent
//   5. expression template by cumulative weight
//   6. one noise draw per realized optional (attribute) token
RefExCorpus generate_world(const WorldConfig& config) {
  config.validate();
  SplitMix64 rng(config.seed);

  std::uint64_t total_weight = 0;
  for (const auto& t : config.templates) total_weight += t.weight;
  std::vector<std::vector<TemplateSlot>> parsed;
  parsed.reserve(config.templates.size());
  for (const auto& t : config.templates) parsed.push_back(parse_template(t.pattern));

  const auto noise_millionths =
      static_cast<std::uint64_t>(config.noise * 1000000.0 + 0.5);

  auto draw_attributes = [&](Referent& r, const CategoryDef& def) {
    r.attributes.clear();
    for (const auto& a : config.attributes) {
      r.attributes[a.name] = a.values[rng.next_below(a.values.size())];
    }
    for (const auto& [name, value] : def.fixed_attributes) {
      r.attributes[name] = value;
    }
  };

  std::vector<RefExRecord> records;
  for (std::size_t ci = 0; ci < config.categories.size(); ++ci) {
    const auto& target_def = config.categories[ci];
    for (std::uint32_t s = 0; s < config.scenes_per_category; ++s) {
      RefExRecord rec;
      rec.scene.id = target_def.id + "_" + std::to_string(s);

      const std::uint64_t n =
          config.min_referents +
          rng.next_below(config.max_referents - config.min_referents + 1);
      const std::uint64_t target_slot = rng.next_below(n);

      rec.scene.referents.resize(n);
      std::set<std::string> signatures;

      Referent target;
      target.id = "r" + std::to_string(target_slot);
      target.category = target_def.id;
      draw_attributes(target, target_def);
      signatures.insert(referent_signature(target, config.attributes));
      rec.scene.referents[target_slot] = target;
      rec.scene.target_index = target_slot;
      rec.target_id = target.id;

      for (std::uint64_t slot = 0; slot < n; ++slot) {
        if (slot == target_slot) continue;
        Referent d;
        d.id = "r" + std::to_string(slot);
        int guard = 0;
        while (true) {
          const auto& def = config.categories[rng.next_below(config.categories.size())];
          d.category = def.id;
          draw_attributes(d, def);
          if (signatures.insert(referent_signature(d, config.attributes)).second) break;
          if (++guard > 100000) {
            throw Error(ErrorCode::kUnsatisfiable,
                        "could not place a distinguishable referent in scene '" +
                            rec.scene.id + "'");
          }
        }
        rec.scene.referents[slot] = std::move(d);
      }

      // expression for the target
      std::uint64_t pick = rng.next_below(total_weight);
      std::size_t ti = 0;
      for (; ti + 1 < config.templates.size(); ++ti) {
        if (pick < config.templates[ti].weight) break;
        pick -= config.templates[ti].weight;
      }
      std::vector<Token> realized;
      std::vector<bool> optional_flag;
      for (const auto& slot : parsed[ti]) {
        switch (slot.kind) {
          case TemplateSlot::kName:
            realized.push_back(target.category);
            optional_flag.push_back(false);
            break;
          case TemplateSlot::kAttribute:
            realized.push_back(target.attributes.at(slot.value));
            optional_flag.push_back(true);
            break;
          case TemplateSlot::kLiteral:
            realized.push_back(slot.value);
            optional_flag.push_back(false);
            break;
        }
      }
      Utterance expr;
      expr.terminated = true;
      for (std::size_t i = 0; i < realized.size(); ++i) {
        if (optional_flag[i] && noise_millionths > 0 &&
            rng.chance_millionths(noise_millionths)) {
          continue;
        }
        expr.tokens.push_back(realized[i]);
      }
      if (expr.tokens.empty() && !realized.empty()) {
        expr.tokens.push_back(realized.front());  // never emit an empty expression
      }
      rec.expression = std::move(expr);
      records.push_back(std::move(rec));
    }
  }
  return RefExCorpus::from_records(std::move(records));
}

}  // namespace zsrg
