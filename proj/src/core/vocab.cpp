#include "rassoc/core/vocab.hpp"

#include "rassoc/errors.hpp"

namespace rassoc {

Vocab::Vocab(const std::vector<std::string>& words) {
  tokens_ = {std::string(kPadToken), std::string(kEosToken), std::string(kSepToken),
             std::string(kBosToken)};
  tokens_.insert(tokens_.end(), words.begin(), words.end());
  index();
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.size() < 4 || tokens[kPad] != kPadToken || tokens[kEos] != kEosToken ||
      tokens[kSep] != kSepToken || tokens[kBos] != kBosToken) {
    throw VocabError("reserved tokens missing or out of place");
  }
  Vocab v;
  v.tokens_ = tokens;
  v.index();
  return v;
}

void Vocab::index() {
  ids_.clear();
  ids_.reserve(tokens_.size());
  for (int i = 0; i < size(); ++i) {
    const auto& t = tokens_[i];
    if (t.empty() || t.find(' ') != std::string::npos) {
      throw VocabError("invalid token '" + t + "'");
    }
    if (!ids_.emplace(t, i).second) throw VocabError("duplicate token '" + t + "'");
  }
}

bool Vocab::contains(std::string_view token) const {
  return ids_.find(std::string(token)) != ids_.end();
}

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) throw VocabError("unknown token '" + std::string(token) + "'");
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw VocabError("token id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

TokenIds Vocab::encode(std::span<const std::string> tokens) const {
  TokenIds out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Tokens Vocab::decode(std::span<const int> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

Tokens split_tokens(std::string_view text) {
  Tokens out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto next = text.find(' ', pos);
    if (next == std::string_view::npos) next = text.size();
    if (next > pos) out.emplace_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace rassoc
