#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sql2text {

enum class GraphEmbeddingMethod { pooling, supernode };
enum class AttentionKind { additive, dot };

struct EncoderConfig {
  std::size_t hop_size = 6;
  std::size_t hidden_dim = 300;
  bool share_direction_weights = false;
  GraphEmbeddingMethod ge_method = GraphEmbeddingMethod::pooling;
  // Ablation: mirror every edge before encoding.
  bool undirected = false;
};

struct DecoderConfig {
  std::size_t hidden_size = 300;
  std::size_t max_decode_len = 60;
  std::size_t beam_size = 5;
  double length_norm_alpha = 0.0;
  AttentionKind attention = AttentionKind::additive;
};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
  std::size_t word_dim = 300;
  double dropout = 0.5;
  // Parameters start uniform in [-init_scale, init_scale]; biases at zero.
  double init_scale = 0.08;
};

struct TrainConfig {
  ModelConfig model;
  double learning_rate = 0.001;
  std::size_t batch_size = 30;
  double clip_norm = 20.0;
  std::size_t epochs = 20;
  // Epochs without dev BLEU improvement before stopping; 0 disables.
  std::size_t patience = 5;
  // Stop once dev BLEU reaches this value; 0 disables.
  double stop_bleu = 0.0;
  // Evaluate dev BLEU every N epochs (and on the last one).
  std::size_t eval_every = 1;
  std::uint64_t seed = 1;
  std::size_t min_freq = 1;
  bool anonymize = false;
  std::string pretrained_vectors;
  std::size_t jobs = 1;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One addressable configuration key.
struct ConfigKey {
  std::string name;
  std::string description;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

const std::vector<ConfigKey>& config_keys();

/// Throws ConfigError for unknown keys or unparseable values.
void set_config_value(TrainConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const TrainConfig& config, const std::string& key);

/// Applies `key = value` lines from a file (# starts a comment).
void apply_config_file(TrainConfig& config, const std::string& path);

nlohmann::ordered_json to_json(const TrainConfig& config);
nlohmann::ordered_json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// FNV-1a 64-bit hash of the serialized config, as 16 hex digits.
std::string config_hash(const nlohmann::ordered_json& j);

void validate(const ModelConfig& config);

}  // namespace sql2text
