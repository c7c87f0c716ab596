#include "sql2text/graph_encoder.hpp"

#include <stdexcept>
#include <string>

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

GraphEncoder::GraphEncoder(const EncoderConfig& config, std::size_t source_vocab_size, std::size_t word_dim,
                           Real init_scale, ParameterStore& store, Rng& rng)
    : config_(config) {
  const std::size_t d = config.hidden_dim;
  if (d == 0) throw std::invalid_argument("encoder hidden_dim must be positive");
  embedding_ = store.add("embedding.source",
                         Tensor::uniform({source_vocab_size, word_dim}, -init_scale, init_scale, rng, true));
  node_lstm_ = LstmCell::create(store, "encoder.node_lstm", word_dim, d, init_scale, rng);
  for (std::size_t k = 1; k <= config.hop_size; ++k) {
    const std::string prefix = "encoder.hop" + std::to_string(k);
    Hop hop;
    hop.forward_aggregator = Linear::create(store, prefix + ".forward.aggregator", d, d, init_scale, rng);
    hop.backward_aggregator = Linear::create(store, prefix + ".backward.aggregator", d, d, init_scale, rng);
    if (config.share_direction_weights) {
      hop.forward_combine = Linear::create(store, prefix + ".combine", 2 * d, d, init_scale, rng);
      hop.backward_combine = hop.forward_combine;
    } else {
      hop.forward_combine = Linear::create(store, prefix + ".forward.combine", 2 * d, d, init_scale, rng);
      hop.backward_combine = Linear::create(store, prefix + ".backward.combine", 2 * d, d, init_scale, rng);
    }
    hops_.push_back(std::move(hop));
  }
  if (config.ge_method == GraphEmbeddingMethod::pooling) {
    pool_ = Linear::create(store, "encoder.pool", 2 * d, 2 * d, init_scale, rng);
    has_pool_ = true;
  }
}

const Linear& GraphEncoder::aggregator(std::size_t hop, Direction dir) const {
  if (hop == 0 || hop > hops_.size()) throw std::out_of_range("hop " + std::to_string(hop) + " out of range");
  const Hop& h = hops_[hop - 1];
  return dir == Direction::forward ? h.forward_aggregator : h.backward_aggregator;
}

const Linear& GraphEncoder::combine(std::size_t hop, Direction dir) const {
  if (hop == 0 || hop > hops_.size()) throw std::out_of_range("hop " + std::to_string(hop) + " out of range");
  const Hop& h = hops_[hop - 1];
  return dir == Direction::forward ? h.forward_combine : h.backward_combine;
}

Tensor GraphEncoder::init_node_features(std::span<const std::vector<std::size_t>> node_tokens) const {
  if (node_tokens.empty()) throw std::invalid_argument("graph has no nodes");
  const std::size_t d = config_.hidden_dim;
  std::vector<Tensor> rows;
  rows.reserve(node_tokens.size());
  for (const auto& tokens : node_tokens) {
    if (tokens.empty()) throw std::invalid_argument("graph node with empty text");
    const Tensor embedded = gather_rows(embedding_, tokens);
    Tensor h = Tensor::zeros({1, d});
    Tensor c = Tensor::zeros({1, d});
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      std::tie(h, c) = node_lstm_.step(row(embedded, t), h, c);
    }
    rows.push_back(std::move(h));
  }
  return concat_rows(rows);
}

Tensor GraphEncoder::init_node_features(const QueryGraph& graph, const Vocabulary& vocab) const {
  std::vector<std::vector<std::size_t>> ids;
  ids.reserve(graph.nodes.size());
  for (const auto& node : graph.nodes) ids.push_back(vocab.encode(node.text));
  return init_node_features(ids);
}

Tensor GraphEncoder::pool_neighbors(const Tensor& neighbor_rows, std::size_t hop, Direction dir) const {
  return max_over_rows(relu(aggregator(hop, dir)(neighbor_rows)));
}

Tensor GraphEncoder::aggregate_direction(std::span<const Tensor> neighbors, std::size_t hop, Direction dir) const {
  const std::size_t d = config_.hidden_dim;
  if (neighbors.empty()) {
    aggregator(hop, dir);
    return Tensor::zeros({1, d});
  }
  for (const Tensor& n : neighbors) {
    if (n.size() != d) {
      throw DimensionError("aggregate_direction: neighbor of shape " + shape_to_string(n.shape()) +
                           " does not have dimension " + std::to_string(d));
    }
  }
  std::vector<Tensor> rows;
  for (const Tensor& n : neighbors) rows.push_back(reshape(n, {1, d}));
  return pool_neighbors(concat_rows(rows), hop, dir);
}

Tensor GraphEncoder::step_direction(const Tensor& previous, const std::vector<std::vector<std::size_t>>& neighbors,
                                    std::size_t hop, Direction dir) const {
  const std::size_t d = config_.hidden_dim;
  std::vector<Tensor> pooled;
  pooled.reserve(neighbors.size());
  for (const auto& list : neighbors) {
    pooled.push_back(list.empty() ? Tensor::zeros({1, d}) : pool_neighbors(gather_rows(previous, list), hop, dir));
  }
  return relu(combine(hop, dir)(concat_cols({previous, concat_rows(pooled)})));
}

NodeEmbeddings GraphEncoder::propagate(const Adjacency& adjacency, const Tensor& features) const {
  const std::size_t n = adjacency.forward.size();
  if (features.ndim() != 2 || features.rows() != n || features.cols() != config_.hidden_dim) {
    throw DimensionError("propagate: features " + shape_to_string(features.shape()) + " for " + std::to_string(n) +
                         " nodes of dimension " + std::to_string(config_.hidden_dim));
  }
  if (adjacency.backward.size() != n) throw DimensionError("propagate: adjacency lists disagree in size");

  NodeEmbeddings out;
  out.features = features;
  out.forward.push_back(features);
  out.backward.push_back(features);
  for (std::size_t k = 1; k <= config_.hop_size; ++k) {
    out.forward.push_back(step_direction(out.forward.back(), adjacency.forward, k, Direction::forward));
    out.backward.push_back(step_direction(out.backward.back(), adjacency.backward, k, Direction::backward));
  }
  out.final = concat_cols({out.forward.back(), out.backward.back()});
  return out;
}

Tensor GraphEncoder::graph_embedding_pooling(const Tensor& final) const {
  if (!has_pool_) throw std::logic_error("encoder was built without a pooling layer");
  if (final.ndim() != 2 || final.rows() == 0) throw DimensionError("graph_embedding_pooling: no nodes");
  return max_over_rows(pool_(final));
}

GraphEncoding GraphEncoder::encode(const QueryGraph& graph, const Vocabulary& vocab) const {
  if (graph.nodes.empty()) throw std::invalid_argument("cannot encode an empty graph");
  GraphEncoding enc;
  enc.graph = config_.undirected ? to_undirected(graph) : graph;
  if (config_.ge_method == GraphEmbeddingMethod::supernode) enc.graph = with_super_node(enc.graph);
  enc.nodes = propagate(Adjacency::from_graph(enc.graph), init_node_features(enc.graph, vocab));
  if (config_.ge_method == GraphEmbeddingMethod::supernode) {
    enc.graph_embedding = row(enc.nodes.final, enc.graph.nodes.size() - 1);
  } else {
    enc.graph_embedding = graph_embedding_pooling(enc.nodes.final);
  }
  return enc;
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
