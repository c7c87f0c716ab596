#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sql2text/attention_decoder.hpp"
#include "sql2text/config.hpp"
#include "sql2text/dataset.hpp"
#include "sql2text/graph_encoder.hpp"

namespace sql2text {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateOptions {
  bool greedy = false;
  std::size_t beam_size = 5;
  std::size_t max_decode_len = 60;
  double length_norm_alpha = 0.0;
};

/// Checkpoint container layout (all integers little-endian):
///   8 bytes   magic "S2TCKPT1"
///   u32       format version
///   u64       header length n
///   n bytes   JSON header: precision, model config, vocabularies,
///             parameter names and shapes (storage order), metadata
///   ...       parameter values, row-major, 4 or 8 bytes each
///   u64       FNV-1a hash of every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[9] = "S2TCKPT1";

inline namespace SQL2TEXT_NUMERIC_NS {

/// Graph encoder plus attention decoder with their vocabularies.
class Graph2Seq {
 public:
  Graph2Seq(const ModelConfig& config, Vocabularies vocabs, std::uint64_t seed);

  Graph2Seq(Graph2Seq&&) = default;
  Graph2Seq& operator=(Graph2Seq&&) = default;
  Graph2Seq(const Graph2Seq&) = delete;
  Graph2Seq& operator=(const Graph2Seq&) = delete;

  const ModelConfig& config() const { return *config_; }
  const Vocabularies& vocabs() const { return *vocabs_; }
  ParameterStore& store() { return *store_; }
  const ParameterStore& store() const { return *store_; }
  const GraphEncoder& encoder() const { return *encoder_; }
  const AttentionDecoder& decoder() const { return *decoder_; }

  /// Free-form JSON stored alongside the parameters (for example the
  /// training configuration).
  const nlohmann::ordered_json& metadata() const { return metadata_; }
  void set_metadata(nlohmann::ordered_json metadata) { metadata_ = std::move(metadata); }

  GraphEncoding encode(const SqlQuery& query) const;

  /// Target ids y_1..y_T with EOS appended.
  std::vector<std::size_t> target_ids(const std::vector<std::string>& target) const;

  /// Summed negative log-likelihood of one pair (dropout when `dropout_rng`
  /// is set).
  Tensor example_loss(const ExamplePair& pair, Rng* dropout_rng) const;

  /// Token-averaged loss over a batch, and the number of target tokens.
  std::pair<Tensor, std::size_t> batch_loss(std::span<const ExamplePair* const> batch, Rng* dropout_rng) const;

  std::vector<std::size_t> generate_ids(const SqlQuery& query, const GenerateOptions& options) const;
  std::vector<std::string> generate(const SqlQuery& query, const GenerateOptions& options) const;
  GenerateOptions default_generate_options() const;

 private:
  // Components hold handles into the store, so everything lives on the heap
  // and moving the model keeps those handles valid.
  std::unique_ptr<ModelConfig> config_;
  std::unique_ptr<Vocabularies> vocabs_;
  std::unique_ptr<ParameterStore> store_;
  std::unique_ptr<GraphEncoder> encoder_;
  std::unique_ptr<AttentionDecoder> decoder_;
  nlohmann::ordered_json metadata_ = nlohmann::ordered_json::object();
};

std::vector<std::uint8_t> serialize_checkpoint(const Graph2Seq& model);
void save_checkpoint(const Graph2Seq& model, const std::string& path);

/// Throws CheckpointError on a bad magic, version, checksum, precision or
/// truncated file. When `expected` is given, every model key must match.
Graph2Seq deserialize_checkpoint(std::span<const std::uint8_t> bytes, const ModelConfig* expected = nullptr);
Graph2Seq load_checkpoint(const std::string& path, const ModelConfig* expected = nullptr);

/// Copies of every parameter's values, in store order.
std::vector<std::vector<Real>> snapshot_parameters(const ParameterStore& store);
void restore_parameters(ParameterStore& store, const std::vector<std::vector<Real>>& snapshot);

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
