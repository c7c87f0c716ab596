#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sql2text/config.hpp"
#include "sql2text/layers.hpp"

namespace sql2text {

/// A (partial) output sequence during beam search.
struct Hypothesis {
  std::vector<std::size_t> tokens;  // y_1..y_t, EOS included once emitted
  double log_prob = 0.0;
  bool terminated = false;

  /// log_prob / t^alpha; plain log_prob when alpha is zero.
  double score(double alpha) const {
    if (alpha == 0.0 || tokens.empty()) return log_prob;
    return log_prob / std::pow(static_cast<double>(tokens.size()), alpha);
  }
};

inline namespace SQL2TEXT_NUMERIC_NS {

struct DecoderState {
  Tensor s;        // 1 x hidden
  Tensor cell;     // 1 x hidden
  Tensor context;  // 1 x memory_dim, c_i for the current s
  std::size_t prev_token = 0;
};

/// Node embeddings prepared for repeated attention queries.
struct AttentionMemory {
  Tensor nodes;      // |V| x memory_dim
  Tensor projected;  // |V| x hidden, the node-side attention term
};

struct AttentionResult {
  Tensor context;  // 1 x memory_dim
  Tensor weights;  // 1 x |V|
};

struct StepResult {
  Tensor logits;     // 1 x vocab
  Tensor log_probs;  // 1 x vocab
  Tensor attention;  // 1 x |V|
  DecoderState next;
};

/// One-layer LSTM decoder with input feeding and attention over node
/// embeddings.
///
/// s_0 = tanh(FC(graph embedding)), the cell starts at zero and c_0 attends
/// with s_0. Each step feeds [embedding(y_{i-1}), c_{i-1}] to the LSTM,
/// attends with the new state and predicts from [s_i, c_i]. When a dropout
/// generator is supplied (training) inverted dropout is applied to that
/// pre-output vector.
class AttentionDecoder {
 public:
  AttentionDecoder(const DecoderConfig& config, std::size_t target_vocab_size, std::size_t word_dim,
                   std::size_t memory_dim, Real dropout, Real init_scale, ParameterStore& store, Rng& rng);

  const DecoderConfig& config() const { return config_; }
  std::size_t memory_dim() const { return memory_dim_; }
  std::size_t vocab_size() const { return vocab_size_; }

  AttentionMemory prepare_memory(const Tensor& node_embeddings) const;
  DecoderState init_state(const Tensor& graph_embedding, const AttentionMemory& memory) const;
  AttentionResult attention_context(const Tensor& s, const AttentionMemory& memory) const;

  /// `dropout_rng` selects train mode; pass nullptr for inference.
  StepResult decode_step(const DecoderState& state, const AttentionMemory& memory, Rng* dropout_rng) const;

  /// -sum_t log p(y_t | y_<t, x) under teacher forcing. `target` is
  /// y_1..y_T and must end with EOS.
  Tensor sequence_loss(const Tensor& graph_embedding, const AttentionMemory& memory,
                       std::span<const std::size_t> target, Rng* dropout_rng) const;

  /// Argmax decoding (lowest id on ties); stops after EOS or max_len tokens.
  /// The returned ids exclude EOS.
  std::vector<std::size_t> greedy(const Tensor& graph_embedding, const AttentionMemory& memory,
                                  std::size_t max_len) const;

  /// Beam search; returns the final beam ordered best first. Terminated
  /// hypotheses stay in the beam and compete on score with live ones.
  std::vector<Hypothesis> beam_search(const Tensor& graph_embedding, const AttentionMemory& memory,
                                      std::size_t beam_size, std::size_t max_len, double alpha) const;

  /// Best terminated hypothesis of a final beam, else the best live one;
  /// ids exclude EOS.
  static std::vector<std::size_t> best_tokens(const std::vector<Hypothesis>& beam, double alpha);

 private:
  // LSTM step and attention without the output layer; returns the
  // pre-output vector [s_i, c_i].
  Tensor advance(const DecoderState& state, const AttentionMemory& memory, DecoderState& next,
                 Tensor* attention) const;
  Tensor output_logits(const Tensor& pre_output, Rng* dropout_rng) const;

  DecoderConfig config_;
  std::size_t memory_dim_;
  std::size_t vocab_size_;
  Real dropout_;
  Tensor embedding_;
  Linear init_;
  LstmCell lstm_;
  Linear attention_state_;
  Linear attention_memory_;
  Tensor attention_v_;  // hidden x 1, additive attention only
  Linear output_;
};

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
