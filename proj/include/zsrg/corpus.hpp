#ifndef ZSRG_CORPUS_HPP
#define ZSRG_CORPUS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "zsrg/types.hpp"

namespace zsrg {

// One (scene, target, expression) observation.
struct RefExRecord {
  Scene scene;
  std::string target_id;
  Utterance expression;

  const Referent& target() const { return scene.target(); }
  bool operator==(const RefExRecord&) const = default;
};

// A referring-expression corpus: records plus the category inventory and
// vocabulary they range over. Inventories are kept sorted so that word and
// category indices are stable across runs and platforms.
class RefExCorpus {
 public:
  RefExCorpus() = default;

  // Builds a corpus whose inventories are the deduplicated union over the
  // records (every referent category, every expression token).
  static RefExCorpus from_records(std::vector<RefExRecord> records);

  // Builds a corpus with explicitly supplied inventories; used by
  // zero_shot_split so both halves keep the parent's category inventory and
  // vocabulary. Inventories must cover the records.
  static RefExCorpus with_inventories(std::vector<RefExRecord> records,
                                      std::vector<CategoryId> categories,
                                      std::vector<Token> vocabulary);

  const std::vector<RefExRecord>& records() const { return records_; }
  const std::vector<CategoryId>& categories() const { return categories_; }
  const std::vector<Token>& vocabulary() const { return vocabulary_; }

  bool has_category(const CategoryId& c) const;

  // Records whose target referent has the given category; preserves order.
  RefExCorpus filter_by_target_category(const CategoryId& c) const;

  bool operator==(const RefExCorpus&) const = default;

 private:
  std::vector<RefExRecord> records_;
  std::vector<CategoryId> categories_;
  std::vector<Token> vocabulary_;
};

// JSONL ingestion. One record per line:
//   {"scene_id": str,
//    "referents": [{"id": str, "category": str, "attributes": {str: str}}],
//    "target_id": str,
//    "expression": [str]}
// When attribute_schema is supplied, any attribute name outside it is an
// error. Malformed input reports the offending line number. An empty file
// yields an empty corpus.
RefExCorpus load_corpus(
    const std::string& path,
    const std::optional<std::set<std::string>>& attribute_schema = std::nullopt);

void save_corpus(const RefExCorpus& corpus, const std::string& path);
std::string corpus_to_jsonl(const RefExCorpus& corpus);
RefExCorpus corpus_from_jsonl(
    const std::string& text,
    const std::optional<std::set<std::string>>& attribute_schema = std::nullopt);

// Moves a record to the test half iff its scene contains any referent
// (target or distractor) of a zero-shot category. Both halves keep the
// parent corpus's category inventory and vocabulary, so tables estimated on
// the train half still range over the zero-shot categories.
std::pair<RefExCorpus, RefExCorpus> zero_shot_split(
    const RefExCorpus& corpus, const std::set<CategoryId>& zero_shot_categories);

// Add-k smoothed P(word | category) over vocabulary x categories.
// Counts come from expressions whose *target* has the category. vocab_size
// is the corpus vocabulary size and is the count used in the smoothing
// denominator; querying a word outside the vocabulary returns the smoothed
// floor k / (total + k * vocab_size) for that category (the OOV mapping).
// Categories with no records get the uniform row 1/vocab_size.
class WordCategoryTable {
 public:
  static WordCategoryTable estimate(const RefExCorpus& train, double smoothing_k);

  // Direct construction from probability rows (category-major, aligned with
  // the sorted inputs). Used for fixtures and priors; rows are taken as
  // given and may be partial views of a larger implicit vocabulary.
  static WordCategoryTable from_probs(std::vector<Token> vocabulary,
                                      std::vector<CategoryId> categories,
                                      std::vector<std::vector<double>> rows);

  double prob(const Token& word, const CategoryId& category) const;
  double prob_by_index(std::size_t word_index, std::size_t category_index) const;
  // Smoothed floor for a word unseen with this category.
  double floor(const CategoryId& category) const;

  const std::vector<Token>& vocabulary() const { return vocabulary_; }
  const std::vector<CategoryId>& categories() const { return categories_; }
  std::size_t vocab_size() const { return vocabulary_.size(); }
  double smoothing_k() const { return smoothing_k_; }
  // Set when estimated from a corpus with no records: every row is uniform.
  bool empty_train() const { return empty_train_; }

  std::optional<std::size_t> category_index(const CategoryId& c) const;
  std::optional<std::size_t> word_index(const Token& w) const;

  std::string to_json() const;
  static WordCategoryTable from_json(const std::string& text);
  void save(const std::string& path) const;
  static WordCategoryTable load(const std::string& path);

 private:
  std::vector<Token> vocabulary_;
  std::vector<CategoryId> categories_;
  std::map<Token, std::size_t> word_index_;
  std::map<CategoryId, std::size_t> category_index_;
  // counts_[c][w]; probabilities derived on query so save/load is exact.
  std::vector<std::vector<std::int64_t>> counts_;
  std::vector<std::int64_t> totals_;
  // direct probability rows when built via from_probs
  std::vector<std::vector<double>> probs_;
  bool direct_probs_ = false;
  double smoothing_k_ = 0.0;
  bool empty_train_ = false;
};

// Category names (canonical name token plus declared synonyms) and their
// union. Noun identification everywhere is lexicon membership.
struct NounLexicon {
  std::map<CategoryId, std::set<Token>> category_names;
  std::set<Token> all_nouns;

  bool is_noun(const Token& t) const { return all_nouns.count(t) > 0; }
  // Nouns that would be wrong for the given category: every category name
  // except its own.
  std::set<Token> distractor_nouns(const CategoryId& category) const;
};

// The canonical name token of a category is its id. Synonym lists may be
// empty; a category missing from `synonyms` just has its canonical name.
NounLexicon build_noun_lexicon(
    const std::vector<CategoryId>& categories,
    const std::map<CategoryId, std::vector<Token>>& synonyms = {});

}  // namespace zsrg

#endif  // ZSRG_CORPUS_HPP
