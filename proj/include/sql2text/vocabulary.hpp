#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace sql2text {

/// Token <-> id bijection with fixed special ids.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kUnk = 3;
  static constexpr std::size_t kNumSpecials = 4;

  Vocabulary();

  /// Keeps tokens with count >= min_freq plus every token accepted by
  /// `always_keep`. Ids follow frequency (descending), then token text.
  static Vocabulary build(const std::map<std::string, std::size_t>& counts, std::size_t min_freq,
                          const std::function<bool(const std::string&)>& always_keep = {});

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t id) const;

  std::vector<std::size_t> encode(const std::vector<std::string>& tokens) const;
  /// Drops specials.
  std::vector<std::string> decode(const std::vector<std::size_t>& ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void push(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// True for anonymized value tokens val_0, val_1, ...
bool is_placeholder_token(std::string_view token);

}  // namespace sql2text
