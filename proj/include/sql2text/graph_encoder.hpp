#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sql2text/config.hpp"
#include "sql2text/layers.hpp"
#include "sql2text/query_graph.hpp"
#include "sql2text/vocabulary.hpp"

namespace sql2text {

enum class Direction { forward, backward };

inline namespace SQL2TEXT_NUMERIC_NS {

/// Per-node representations of one propagation run.
struct NodeEmbeddings {
  Tensor features;              // a_v, |V| x d
  std::vector<Tensor> forward;  // forward[k], k = 0..K, |V| x d
  std::vector<Tensor> backward;
  Tensor final;  // concat(forward[K], backward[K]), |V| x 2d
};

struct GraphEncoding {
  QueryGraph graph;  // the view actually encoded (mirrored / with super node)
  NodeEmbeddings nodes;
  Tensor graph_embedding;  // 1 x 2d
};

/// Bidirectional K-hop neighbor-aggregation encoder.
///
/// For every hop k and direction, neighbors are passed through their own
/// fully connected layer with ReLU and max-pooled coordinatewise; the pooled
/// vector is concatenated with the node's previous representation and mapped
/// back to d dimensions by W^k followed by ReLU. Forward neighbors are the
/// nodes v points to, backward neighbors the nodes pointing to v.
class GraphEncoder {
 public:
  GraphEncoder(const EncoderConfig& config, std::size_t source_vocab_size, std::size_t word_dim, Real init_scale,
               ParameterStore& store, Rng& rng);

  const EncoderConfig& config() const { return config_; }
  std::size_t hidden_dim() const { return config_.hidden_dim; }
  const Tensor& embedding() const { return embedding_; }
  const LstmCell& node_lstm() const { return node_lstm_; }

  /// Final LSTM state over each node's token embeddings, |V| x d.
  Tensor init_node_features(std::span<const std::vector<std::size_t>> node_tokens) const;
  Tensor init_node_features(const QueryGraph& graph, const Vocabulary& vocab) const;

  /// Pools 1 x d neighbor rows at hop k (1-based); empty input gives zeros.
  Tensor aggregate_direction(std::span<const Tensor> neighbors, std::size_t hop, Direction dir) const;

  NodeEmbeddings propagate(const Adjacency& adjacency, const Tensor& features) const;

  /// Max over nodes of FC(final_v).
  Tensor graph_embedding_pooling(const Tensor& final) const;

  /// Runs feature initialization, propagation and the configured graph
  /// embedding (pooling, or the super node's final row).
  GraphEncoding encode(const QueryGraph& graph, const Vocabulary& vocab) const;

 private:
  struct Hop {
    Linear forward_aggregator;
    Linear backward_aggregator;
    Linear forward_combine;
    Linear backward_combine;  // same tensors as forward_combine when shared
  };

  const Linear& aggregator(std::size_t hop, Direction dir) const;
  const Linear& combine(std::size_t hop, Direction dir) const;
  Tensor pool_neighbors(const Tensor& neighbor_rows, std::size_t hop, Direction dir) const;
  Tensor step_direction(const Tensor& previous, const std::vector<std::vector<std::size_t>>& neighbors,
                        std::size_t hop, Direction dir) const;

  EncoderConfig config_;
  Tensor embedding_;
  LstmCell node_lstm_;
  std::vector<Hop> hops_;
  Linear pool_;
  bool has_pool_ = false;
};

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
