#include "zsrg/speaker.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "zsrg/jsonutil.hpp"

namespace zsrg {

using nlohmann::ordered_json;

Vocabulary::Vocabulary(std::vector<Token> sorted_tokens)
    : tokens_(std::move(sorted_tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = i;
}

std::optional<std::size_t> Vocabulary::id(const Token& t) const {
  const auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {
constexpr char kKeySep = '\x1f';
}

std::string LiteralSpeaker::feature_bucket(const Referent& r,
                                           bool with_category) const {
  std::string key;
  if (with_category && rule_.use_category) key = r.category;
  for (const auto& name : rule_.attributes) {
    key += kKeySep;
    const auto it = r.attributes.find(name);
    key += (it == r.attributes.end()) ? "" : it->second;
  }
  return key;
}

LiteralSpeaker LiteralSpeaker::train(const RefExCorpus& train, double smoothing_k,
                                     const FeatureRule& rule) {
  if (train.records().empty()) {
    throw Error(ErrorCode::kInvalid, "cannot train a speaker on an empty corpus");
  }
  if (smoothing_k < 0.0) {
    throw Error(ErrorCode::kInvalid, "smoothing_k must be nonnegative");
  }
  LiteralSpeaker s;
  s.vocab_ = Vocabulary(train.vocabulary());
  s.smoothing_k_ = smoothing_k;
  s.rule_ = rule;
  // A separate attribute-only level exists only when dropping the category
  // actually changes the key.
  s.has_attr_level_ = rule.use_category && !rule.attributes.empty();

  const std::size_t eos = s.eos_id();
  for (const auto& rec : train.records()) {
    const Referent& target = rec.target();
    const std::string bucket = s.feature_bucket(target, true);
    const std::string attrs_bucket =
        s.has_attr_level_ ? s.feature_bucket(target, false) : std::string();

    std::string prev = kBosToken;
    auto count_step = [&](std::size_t outcome) {
      auto bump = [&](Level& level, const std::string& key) {
        Row& row = level[key];
        ++row.counts[outcome];
        ++row.total;
      };
      bump(s.bucket_level_, bucket + kKeySep + prev);
      if (s.has_attr_level_) bump(s.attrs_level_, attrs_bucket + kKeySep + prev);
      bump(s.prev_level_, prev);
      ++s.unigram_.counts[outcome];
      ++s.unigram_.total;
    };
    for (const auto& tok : rec.expression.tokens) {
      count_step(*s.vocab_.id(tok));
      prev = tok;
    }
    if (rec.expression.terminated) count_step(eos);
  }
  return s;
}

double LiteralSpeaker::row_prob(const Row& row, std::size_t outcome_id) const {
  const double denom =
      static_cast<double>(row.total) +
      smoothing_k_ * static_cast<double>(vocab_.size() + 1);
  const auto it = row.counts.find(outcome_id);
  const double count = (it == row.counts.end()) ? 0.0 : static_cast<double>(it->second);
  if (denom == 0.0) return 1.0 / static_cast<double>(vocab_.size() + 1);
  return (count + smoothing_k_) / denom;
}

double LiteralSpeaker::row_floor(const Row& row) const {
  const double denom =
      static_cast<double>(row.total) +
      smoothing_k_ * static_cast<double>(vocab_.size() + 1);
  if (denom == 0.0) return 1.0 / static_cast<double>(vocab_.size() + 1);
  return smoothing_k_ / denom;
}

const LiteralSpeaker::Row* LiteralSpeaker::find_row(const Referent& referent,
                                                    const Token& prev_key) const {
  {
    const auto it = bucket_level_.find(feature_bucket(referent, true) + kKeySep + prev_key);
    if (it != bucket_level_.end() && it->second.total > 0) return &it->second;
  }
  if (has_attr_level_) {
    const auto it = attrs_level_.find(feature_bucket(referent, false) + kKeySep + prev_key);
    if (it != attrs_level_.end() && it->second.total > 0) return &it->second;
  }
  {
    const auto it = prev_level_.find(prev_key);
    if (it != prev_level_.end() && it->second.total > 0) return &it->second;
  }
  return &unigram_;
}

Token LiteralSpeaker::prev_token_key(const Utterance& prefix) const {
  return prefix.tokens.empty() ? Token(kBosToken) : prefix.tokens.back();
}

std::vector<double> LiteralSpeaker::next_word_dist(const Referent& referent,
                                                   const Utterance& prefix) const {
  if (prefix.terminated) {
    throw Error(ErrorCode::kInvalid,
                "next_word_dist queried with a terminated prefix");
  }
  const Row* row = find_row(referent, prev_token_key(prefix));
  std::vector<double> dist(vocab_.size() + 1);
  for (std::size_t w = 0; w < dist.size(); ++w) dist[w] = row_prob(*row, w);
  return dist;
}

double LiteralSpeaker::step_prob(const Referent& referent, const Token& prev,
                                 const Token& next) const {
  const Row* row = find_row(referent, prev);
  if (next == kEosToken) return row_prob(*row, eos_id());
  const auto id = vocab_.id(next);
  if (!id) return row_floor(*row);  // OOV mapping
  return row_prob(*row, *id);
}

double LiteralSpeaker::eos_step_prob(const Referent& referent,
                                     const Token& prev) const {
  return row_prob(*find_row(referent, prev), eos_id());
}

Utterance LiteralSpeaker::decode_greedy(const Referent& referent,
                                        std::size_t max_len) const {
  if (max_len < 1) {
    throw Error(ErrorCode::kInvalid, "max_len must be at least 1");
  }
  Utterance out;
  while (out.tokens.size() < max_len) {
    const auto dist = next_word_dist(referent, out);
    // argmax; ties break toward the lowest id, and EOS (the last slot)
    // never beats an equal word
    std::size_t best = 0;
    for (std::size_t w = 1; w < dist.size(); ++w) {
      if (dist[w] > dist[best]) best = w;
    }
    if (best == eos_id()) {
      out.terminated = true;
      break;
    }
    out.tokens.push_back(vocab_.token(best));
  }
  return out;
}

double LiteralSpeaker::utterance_log_prob(const Referent& referent,
                                          const Utterance& utterance) const {
  double lp = 0.0;
  Token prev = kBosToken;
  for (const auto& tok : utterance.tokens) {
    lp += std::log(step_prob(referent, prev, tok));
    prev = tok;
  }
  if (utterance.terminated) {
    lp += std::log(eos_step_prob(referent, prev));
  }
  return lp;
}

// ---------------------------------------------------------------------------
// serialization: counts keyed by token strings so the artifact is
// self-describing and exact (integers only)

namespace {

ordered_json row_to_json(
    const std::unordered_map<std::size_t, std::int64_t>& counts,
    const Vocabulary& vocab) {
  // sorted by outcome id for stable output
  std::vector<std::pair<std::size_t, std::int64_t>> entries(counts.begin(),
                                                            counts.end());
  std::sort(entries.begin(), entries.end());
  ordered_json j = ordered_json::object();
  for (const auto& [id, n] : entries) {
    j[id == vocab.size() ? std::string(kEosToken) : vocab.token(id)] = n;
  }
  return j;
}

}  // namespace

std::string LiteralSpeaker::to_json() const {
  ordered_json j;
  j["format"] = "zsrg-speaker";
  j["format_version"] = 1;
  j["smoothing_k"] = smoothing_k_;
  j["feature_rule"] = {{"use_category", rule_.use_category},
                       {"attributes", rule_.attributes}};
  j["vocabulary"] = vocab_.tokens();

  auto dump_level = [&](const Level& level) {
    std::vector<std::string> keys;
    keys.reserve(level.size());
    for (const auto& [key, _] : level) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    ordered_json out = ordered_json::object();
    for (const auto& key : keys) out[key] = row_to_json(level.at(key).counts, vocab_);
    return out;
  };
  j["counts"] = {{"bucket_prev", dump_level(bucket_level_)},
                 {"attrs_prev", dump_level(attrs_level_)},
                 {"prev", dump_level(prev_level_)},
                 {"unigram", row_to_json(unigram_.counts, vocab_)}};
  return j.dump(2) + "\n";
}

LiteralSpeaker LiteralSpeaker::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad speaker json: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "zsrg-speaker") {
    throw Error(ErrorCode::kParse, "not a zsrg-speaker artifact");
  }
  LiteralSpeaker s;
  try {
    s.smoothing_k_ = j.at("smoothing_k").get<double>();
    s.rule_.use_category = j.at("feature_rule").at("use_category").get<bool>();
    s.rule_.attributes =
        j.at("feature_rule").at("attributes").get<std::vector<std::string>>();
    s.vocab_ = Vocabulary(j.at("vocabulary").get<std::vector<Token>>());
    s.has_attr_level_ = s.rule_.use_category && !s.rule_.attributes.empty();

    auto parse_row = [&](const ordered_json& jr) {
      Row row;
      for (const auto& [token, n] : jr.items()) {
        std::size_t id;
        if (token == kEosToken) {
          id = s.vocab_.size();
        } else {
          const auto maybe = s.vocab_.id(token);
          if (!maybe) {
            throw Error(ErrorCode::kParse,
                        "speaker counts mention unknown token '" + token + "'");
          }
          id = *maybe;
        }
        const auto count = n.template get<std::int64_t>();
        row.counts[id] = count;
        row.total += count;
      }
      return row;
    };
    auto parse_level = [&](const ordered_json& jl, Level& level) {
      for (const auto& [key, jr] : jl.items()) level[key] = parse_row(jr);
    };
    parse_level(j.at("counts").at("bucket_prev"), s.bucket_level_);
    parse_level(j.at("counts").at("attrs_prev"), s.attrs_level_);
    parse_level(j.at("counts").at("prev"), s.prev_level_);
    s.unigram_ = parse_row(j.at("counts").at("unigram"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad speaker json: ") + e.what());
  }
  return s;
}

void LiteralSpeaker::save(const std::string& path) const {
  write_file(path, to_json());
}

LiteralSpeaker LiteralSpeaker::load(const std::string& path) {
  return from_json(read_file(path));
}

}  // namespace zsrg
