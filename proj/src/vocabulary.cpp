#include "sql2text/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace sql2text {

namespace {
const char* const kSpecialTokens[] = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocabulary::Vocabulary() {
  for (const char* s : kSpecialTokens) push(s);
}

void Vocabulary::push(const std::string& token) {
  if (!ids_.emplace(token, tokens_.size()).second) throw std::invalid_argument("duplicate vocabulary token " + token);
  tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::map<std::string, std::size_t>& counts, std::size_t min_freq,
                             const std::function<bool(const std::string&)>& always_keep) {
  std::vector<std::pair<std::string, std::size_t>> kept;
  Vocabulary vocab;
  for (const auto& [tok, n] : counts) {
    if (vocab.contains(tok)) continue;
    if (n >= min_freq || (always_keep && always_keep(tok))) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, n] : kept) vocab.push(tok);
  return vocab;
}

std::size_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.count(std::string(token)) != 0; }

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size()) throw std::out_of_range("vocabulary id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::vector<std::size_t> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(const std::vector<std::size_t>& ids) const {
  std::vector<std::string> out;
  for (std::size_t i : ids) {
    if (i == kPad || i == kBos || i == kEos) continue;
    out.push_back(token(i));
  }
  return out;
}

nlohmann::json Vocabulary::to_json() const { return tokens_; }

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  auto tokens = j.get<std::vector<std::string>>();
  if (tokens.size() < kNumSpecials) throw std::invalid_argument("vocabulary is missing special tokens");
  for (std::size_t i = 0; i < kNumSpecials; ++i) {
    if (tokens[i] != kSpecialTokens[i]) throw std::invalid_argument("vocabulary specials out of place");
  }
  Vocabulary v;
  for (std::size_t i = kNumSpecials; i < tokens.size(); ++i) v.push(tokens[i]);
  return v;
}

bool is_placeholder_token(std::string_view token) {
  if (token.size() < 5 || token.substr(0, 4) != "val_") return false;
  return std::all_of(token.begin() + 4, token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace sql2text
