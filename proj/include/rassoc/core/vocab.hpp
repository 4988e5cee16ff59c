#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rassoc {

using Tokens = std::vector<std::string>;
using TokenIds = std::vector<int>;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kEosToken = "</s>";
inline constexpr std::string_view kSepToken = "explanation:";
inline constexpr std::string_view kBosToken = "<s>";

// Word-level vocabulary. Ids 0..3 are always PAD, EOS, SEP, BOS.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kEos = 1;
  static constexpr int kSep = 2;
  static constexpr int kBos = 3;

  // `words` must not contain the reserved tokens; they are prepended.
  explicit Vocab(const std::vector<std::string>& words);

  // Rebuilds from a full token list (reserved tokens first), e.g. a checkpoint.
  static Vocab from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(std::string_view token) const;
  int id(std::string_view token) const;  // throws VocabError
  const std::string& token(int id) const;

  TokenIds encode(std::span<const std::string> tokens) const;
  Tokens decode(std::span<const int> ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  Vocab() = default;
  void index();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Splits on single spaces; empty pieces are dropped.
Tokens split_tokens(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

}  // namespace rassoc
