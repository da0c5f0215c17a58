#include "zsrg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "zsrg/jsonutil.hpp"

namespace zsrg {

using nlohmann::ordered_json;

void Scene::validate() const {
  if (target_index >= referents.size()) {
    throw Error(ErrorCode::kInvalid,
                "scene '" + id + "': target_index out of range");
  }
  std::set<std::string> seen;
  for (const auto& r : referents) {
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::kInvalid,
                  "scene '" + id + "': duplicate referent id '" + r.id + "'");
    }
  }
  if (!referent_prior.empty()) {
    if (referent_prior.size() != referents.size()) {
      throw Error(ErrorCode::kInvalid,
                  "scene '" + id + "': prior length mismatch");
    }
    double sum = 0.0;
    for (double p : referent_prior) {
      if (p < 0.0) {
        throw Error(ErrorCode::kInvalid, "scene '" + id + "': negative prior");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalid,
                  "scene '" + id + "': prior does not sum to 1");
    }
  }
}

std::string Utterance::joined() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool Utterance::contains(const Token& t) const {
  return std::find(tokens.begin(), tokens.end(), t) != tokens.end();
}

namespace {

template <typename T>
std::vector<T> sorted_unique(std::set<T> values) {
  return std::vector<T>(values.begin(), values.end());
}

}  // namespace

RefExCorpus RefExCorpus::from_records(std::vector<RefExRecord> records) {
  std::set<CategoryId> cats;
  std::set<Token> vocab;
  for (const auto& rec : records) {
    for (const auto& r : rec.scene.referents) cats.insert(r.category);
    for (const auto& t : rec.expression.tokens) vocab.insert(t);
  }
  return with_inventories(std::move(records), sorted_unique(std::move(cats)),
                          sorted_unique(std::move(vocab)));
}

RefExCorpus RefExCorpus::with_inventories(std::vector<RefExRecord> records,
                                          std::vector<CategoryId> categories,
                                          std::vector<Token> vocabulary) {
  for (const char* reserved : {kBosToken, kEosToken, kOovToken}) {
    if (std::binary_search(vocabulary.begin(), vocabulary.end(),
                           std::string(reserved))) {
      throw Error(ErrorCode::kInvalid, "vocabulary contains reserved token '" +
                                           std::string(reserved) + "'");
    }
  }
  for (const auto& rec : records) {
    rec.scene.validate();
    for (const auto& r : rec.scene.referents) {
      if (!std::binary_search(categories.begin(), categories.end(), r.category)) {
        throw Error(ErrorCode::kInvalid, "referent category '" + r.category +
                                             "' missing from inventory");
      }
    }
    for (const auto& t : rec.expression.tokens) {
      if (!std::binary_search(vocabulary.begin(), vocabulary.end(), t)) {
        throw Error(ErrorCode::kInvalid,
                    "expression token '" + t + "' missing from vocabulary");
      }
    }
    if (rec.scene.target().id != rec.target_id) {
      throw Error(ErrorCode::kInvalid,
                  "scene '" + rec.scene.id + "': target_id mismatch");
    }
  }
  RefExCorpus c;
  c.records_ = std::move(records);
  c.categories_ = std::move(categories);
  c.vocabulary_ = std::move(vocabulary);
  return c;
}

bool RefExCorpus::has_category(const CategoryId& c) const {
  return std::binary_search(categories_.begin(), categories_.end(), c);
}

RefExCorpus RefExCorpus::filter_by_target_category(const CategoryId& c) const {
  std::vector<RefExRecord> kept;
  for (const auto& rec : records_) {
    if (rec.target().category == c) kept.push_back(rec);
  }
  return with_inventories(std::move(kept), categories_, vocabulary_);
}

namespace {

RefExRecord record_from_json(const ordered_json& j, std::size_t line_no,
                             const std::optional<std::set<std::string>>& schema) {
  auto fail = [line_no](const std::string& what) -> Error {
    return Error(ErrorCode::kParse,
                 "line " + std::to_string(line_no) + ": " + what);
  };
  if (!j.is_object()) throw fail("record is not an object");
  RefExRecord rec;
  try {
    rec.scene.id = j.at("scene_id").get<std::string>();
    rec.target_id = j.at("target_id").get<std::string>();
    for (const auto& jr : j.at("referents")) {
      Referent r;
      r.id = jr.at("id").get<std::string>();
      r.category = jr.at("category").get<std::string>();
      if (jr.contains("attributes")) {
        for (const auto& [name, value] : jr.at("attributes").items()) {
          if (schema && schema->count(name) == 0) {
            throw fail("referent '" + r.id + "': unknown attribute '" + name +
                       "' (not in declared schema)");
          }
          r.attributes[name] = value.get<std::string>();
        }
      }
      rec.scene.referents.push_back(std::move(r));
    }
    for (const auto& t : j.at("expression")) {
      rec.expression.tokens.push_back(t.get<std::string>());
    }
    rec.expression.terminated = true;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
  bool found = false;
  for (std::size_t i = 0; i < rec.scene.referents.size(); ++i) {
    if (rec.scene.referents[i].id == rec.target_id) {
      rec.scene.target_index = i;
      found = true;
      break;
    }
  }
  if (!found) {
    throw fail("target_id '" + rec.target_id + "' not among scene referents");
  }
  try {
    rec.scene.validate();
  } catch (const Error& e) {
    throw fail(e.what());
  }
  return rec;
}

ordered_json record_to_json(const RefExRecord& rec) {
  ordered_json j;
  j["scene_id"] = rec.scene.id;
  j["referents"] = ordered_json::array();
  for (const auto& r : rec.scene.referents) {
    ordered_json jr;
    jr["id"] = r.id;
    jr["category"] = r.category;
    jr["attributes"] = ordered_json::object();
    for (const auto& [name, value] : r.attributes) jr["attributes"][name] = value;
    j["referents"].push_back(std::move(jr));
  }
  j["target_id"] = rec.target_id;
  j["expression"] = rec.expression.tokens;
  return j;
}

}  // namespace

RefExCorpus corpus_from_jsonl(
    const std::string& text,
    const std::optional<std::set<std::string>>& attribute_schema) {
  std::vector<RefExRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(record_from_json(j, line_no, attribute_schema));
  }
  return RefExCorpus::from_records(std::move(records));
}

RefExCorpus load_corpus(const std::string& path,
                        const std::optional<std::set<std::string>>& attribute_schema) {
  return corpus_from_jsonl(read_file(path), attribute_schema);
}

std::string corpus_to_jsonl(const RefExCorpus& corpus) {
  std::string out;
  for (const auto& rec : corpus.records()) {
    out += record_to_json(rec).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const RefExCorpus& corpus, const std::string& path) {
  write_file(path, corpus_to_jsonl(corpus));
}

std::pair<RefExCorpus, RefExCorpus> zero_shot_split(
    const RefExCorpus& corpus, const std::set<CategoryId>& zero_shot_categories) {
  for (const auto& z : zero_shot_categories) {
    if (!corpus.has_category(z)) {
      throw Error(ErrorCode::kInvalid,
                  "unknown zero-shot category '" + z + "'");
    }
  }
  std::vector<RefExRecord> train, test;
  for (const auto& rec : corpus.records()) {
    bool has_zero_shot = false;
    for (const auto& r : rec.scene.referents) {
      if (zero_shot_categories.count(r.category) > 0) {
        has_zero_shot = true;
        break;
      }
    }
    (has_zero_shot ? test : train).push_back(rec);
  }
  // Both halves keep the parent inventories.
  return {RefExCorpus::with_inventories(std::move(train), corpus.categories(),
                                        corpus.vocabulary()),
          RefExCorpus::with_inventories(std::move(test), corpus.categories(),
                                        corpus.vocabulary())};
}

// ---------------------------------------------------------------------------
// WordCategoryTable

WordCategoryTable WordCategoryTable::estimate(const RefExCorpus& train,
                                              double smoothing_k) {
  if (smoothing_k < 0.0) {
    throw Error(ErrorCode::kInvalid, "smoothing_k must be nonnegative");
  }
  WordCategoryTable t;
  t.vocabulary_ = train.vocabulary();
  t.categories_ = train.categories();
  t.smoothing_k_ = smoothing_k;
  t.empty_train_ = train.records().empty();
  for (std::size_t i = 0; i < t.vocabulary_.size(); ++i) {
    t.word_index_[t.vocabulary_[i]] = i;
  }
  for (std::size_t i = 0; i < t.categories_.size(); ++i) {
    t.category_index_[t.categories_[i]] = i;
  }
  t.counts_.assign(t.categories_.size(),
                   std::vector<std::int64_t>(t.vocabulary_.size(), 0));
  t.totals_.assign(t.categories_.size(), 0);
  for (const auto& rec : train.records()) {
    const auto c = t.category_index_.at(rec.target().category);
    for (const auto& tok : rec.expression.tokens) {
      ++t.counts_[c][t.word_index_.at(tok)];
      ++t.totals_[c];
    }
  }
  return t;
}

WordCategoryTable WordCategoryTable::from_probs(
    std::vector<Token> vocabulary, std::vector<CategoryId> categories,
    std::vector<std::vector<double>> rows) {
  if (rows.size() != categories.size()) {
    throw Error(ErrorCode::kInvalid, "row count does not match categories");
  }
  for (const auto& row : rows) {
    if (row.size() != vocabulary.size()) {
      throw Error(ErrorCode::kInvalid, "row length does not match vocabulary");
    }
  }
  WordCategoryTable t;
  t.vocabulary_ = std::move(vocabulary);
  t.categories_ = std::move(categories);
  t.probs_ = std::move(rows);
  t.direct_probs_ = true;
  for (std::size_t i = 0; i < t.vocabulary_.size(); ++i) {
    t.word_index_[t.vocabulary_[i]] = i;
  }
  for (std::size_t i = 0; i < t.categories_.size(); ++i) {
    t.category_index_[t.categories_[i]] = i;
  }
  return t;
}

double WordCategoryTable::prob_by_index(std::size_t word_index,
                                        std::size_t category_index) const {
  if (direct_probs_) return probs_.at(category_index).at(word_index);
  if (vocabulary_.empty()) return 1.0;
  const auto total = totals_.at(category_index);
  if (total == 0 && smoothing_k_ == 0.0) {
    // category absent from training: uniform row
    return 1.0 / static_cast<double>(vocabulary_.size());
  }
  const double denom = static_cast<double>(total) +
                       smoothing_k_ * static_cast<double>(vocabulary_.size());
  if (denom == 0.0) return 1.0 / static_cast<double>(vocabulary_.size());
  return (static_cast<double>(counts_.at(category_index).at(word_index)) +
          smoothing_k_) /
         denom;
}

double WordCategoryTable::floor(const CategoryId& category) const {
  const auto it = category_index_.find(category);
  if (it == category_index_.end()) {
    throw Error(ErrorCode::kInvalid, "unknown category '" + category + "'");
  }
  if (direct_probs_) return 0.0;
  if (vocabulary_.empty()) return 1.0;
  const auto total = totals_.at(it->second);
  if (total == 0 && smoothing_k_ == 0.0) {
    return 1.0 / static_cast<double>(vocabulary_.size());
  }
  const double denom = static_cast<double>(total) +
                       smoothing_k_ * static_cast<double>(vocabulary_.size());
  if (denom == 0.0) return 1.0 / static_cast<double>(vocabulary_.size());
  return smoothing_k_ / denom;
}

double WordCategoryTable::prob(const Token& word, const CategoryId& category) const {
  const auto ci = category_index_.find(category);
  if (ci == category_index_.end()) {
    throw Error(ErrorCode::kInvalid, "unknown category '" + category + "'");
  }
  const auto wi = word_index_.find(word);
  if (wi == word_index_.end()) return floor(category);  // OOV mapping
  return prob_by_index(wi->second, ci->second);
}

std::optional<std::size_t> WordCategoryTable::category_index(
    const CategoryId& c) const {
  const auto it = category_index_.find(c);
  if (it == category_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> WordCategoryTable::word_index(const Token& w) const {
  const auto it = word_index_.find(w);
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::string WordCategoryTable::to_json() const {
  if (direct_probs_) {
    throw Error(ErrorCode::kInvalid,
                "cannot serialize a fixture table built from raw probabilities");
  }
  ordered_json j;
  j["format"] = "zsrg-table";
  j["format_version"] = 1;
  j["smoothing_k"] = smoothing_k_;
  j["empty_train"] = empty_train_;
  j["vocabulary"] = vocabulary_;
  j["categories"] = categories_;
  j["counts"] = counts_;
  j["totals"] = totals_;
  return j.dump(2) + "\n";
}

WordCategoryTable WordCategoryTable::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad table json: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "zsrg-table") {
    throw Error(ErrorCode::kParse, "not a zsrg-table artifact");
  }
  WordCategoryTable t;
  try {
    t.smoothing_k_ = j.at("smoothing_k").get<double>();
    t.empty_train_ = j.at("empty_train").get<bool>();
    t.vocabulary_ = j.at("vocabulary").get<std::vector<Token>>();
    t.categories_ = j.at("categories").get<std::vector<CategoryId>>();
    t.counts_ = j.at("counts").get<std::vector<std::vector<std::int64_t>>>();
    t.totals_ = j.at("totals").get<std::vector<std::int64_t>>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad table json: ") + e.what());
  }
  if (t.counts_.size() != t.categories_.size() ||
      t.totals_.size() != t.categories_.size()) {
    throw Error(ErrorCode::kParse, "table shape mismatch");
  }
  for (const auto& row : t.counts_) {
    if (row.size() != t.vocabulary_.size()) {
      throw Error(ErrorCode::kParse, "table shape mismatch");
    }
  }
  for (std::size_t i = 0; i < t.vocabulary_.size(); ++i) {
    t.word_index_[t.vocabulary_[i]] = i;
  }
  for (std::size_t i = 0; i < t.categories_.size(); ++i) {
    t.category_index_[t.categories_[i]] = i;
  }
  return t;
}

void WordCategoryTable::save(const std::string& path) const {
  write_file(path, to_json());
}

WordCategoryTable WordCategoryTable::load(const std::string& path) {
  return from_json(read_file(path));
}

// ---------------------------------------------------------------------------
// NounLexicon

std::set<Token> NounLexicon::distractor_nouns(const CategoryId& category) const {
  std::set<Token> out = all_nouns;
  const auto it = category_names.find(category);
  if (it != category_names.end()) {
    for (const auto& t : it->second) out.erase(t);
  }
  return out;
}

NounLexicon build_noun_lexicon(
    const std::vector<CategoryId>& categories,
    const std::map<CategoryId, std::vector<Token>>& synonyms) {
  NounLexicon lex;
  for (const auto& c : categories) {
    if (c.empty()) {
      throw Error(ErrorCode::kInvalid, "category with empty name");
    }
    std::set<Token> names{c};
    const auto it = synonyms.find(c);
    if (it != synonyms.end()) {
      for (const auto& s : it->second) names.insert(s);
    }
    lex.all_nouns.insert(names.begin(), names.end());
    lex.category_names[c] = std::move(names);
  }
  return lex;
}

}  // namespace zsrg
