#ifndef ZSRG_TYPES_HPP
#define ZSRG_TYPES_HPP

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsrg {

using CategoryId = std::string;
using Token = std::string;

enum class ErrorCode {
  kIo = 1,
  kParse = 2,
  kInvalid = 3,
  kUnsatisfiable = 4,
  kInternal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Reserved tokens. They are sentinels for conditioning and scoring and are
// never members of a corpus vocabulary.
inline constexpr const char* kBosToken = "<s>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr const char* kOovToken = "<oov>";

// One object in a scene: ground-truth category plus discrete attributes.
struct Referent {
  std::string id;
  CategoryId category;
  std::map<std::string, std::string> attributes;

  bool operator==(const Referent&) const = default;
};

// A reference game context: candidate objects and which one is the target.
// referent_prior is optional; empty means uniform P(r).
struct Scene {
  std::string id;
  std::vector<Referent> referents;
  std::size_t target_index = 0;
  std::vector<double> referent_prior;

  const Referent& target() const { return referents.at(target_index); }
  // Throws Error(kInvalid) on out-of-range target, duplicate referent ids,
  // or a prior that is negative or does not sum to 1 (tolerance 1e-9).
  void validate() const;

  bool operator==(const Scene&) const = default;
};

struct Utterance {
  std::vector<Token> tokens;
  bool terminated = false;

  std::string joined() const;
  bool contains(const Token& t) const;

  bool operator==(const Utterance&) const = default;
};

}  // namespace zsrg

#endif  // ZSRG_TYPES_HPP
