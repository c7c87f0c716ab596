#include "sql2text/attention_decoder.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sql2text/vocabulary.hpp"

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

namespace {

// Indices of the k largest entries, larger value first, lower id on ties.
std::vector<std::size_t> top_k(std::span<const Real> values, std::size_t k) {
  std::vector<std::size_t> ids(values.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  k = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); });
  ids.resize(k);
  return ids;
}

}  // namespace

AttentionDecoder::AttentionDecoder(const DecoderConfig& config, std::size_t target_vocab_size, std::size_t word_dim,
                                   std::size_t memory_dim, Real dropout, Real init_scale, ParameterStore& store,
                                   Rng& rng)
    : config_(config), memory_dim_(memory_dim), vocab_size_(target_vocab_size), dropout_(dropout) {
  const std::size_t h = config.hidden_size;
  if (h == 0) throw std::invalid_argument("decoder hidden_size must be positive");
  if (config.beam_size == 0) throw std::invalid_argument("beam_size must be at least 1");
  if (config.max_decode_len == 0) throw std::invalid_argument("max_decode_len must be at least 1");
  embedding_ = store.add("embedding.target",
                         Tensor::uniform({target_vocab_size, word_dim}, -init_scale, init_scale, rng, true));
  init_ = Linear::create(store, "decoder.init", memory_dim, h, init_scale, rng);
  lstm_ = LstmCell::create(store, "decoder.lstm", word_dim + memory_dim, h, init_scale, rng);
  if (config.attention == AttentionKind::additive) {
    attention_state_ = Linear::create(store, "decoder.attention.state", h, h, init_scale, rng);
    attention_memory_ = Linear::create(store, "decoder.attention.memory", memory_dim, h, init_scale, rng);
    attention_v_ = store.add("decoder.attention.v", Tensor::uniform({h, 1}, -init_scale, init_scale, rng, true));
  } else {
    attention_memory_ = Linear::create(store, "decoder.attention.memory", memory_dim, h, init_scale, rng);
  }
  output_ = Linear::create(store, "decoder.output", h + memory_dim, target_vocab_size, init_scale, rng);
}

AttentionMemory AttentionDecoder::prepare_memory(const Tensor& node_embeddings) const {
  if (node_embeddings.ndim() != 2 || node_embeddings.rows() == 0 || node_embeddings.cols() != memory_dim_) {
    throw DimensionError("attention memory must be |V| x " + std::to_string(memory_dim_) + ", got " +
                         shape_to_string(node_embeddings.shape()));
  }
  return {node_embeddings, attention_memory_(node_embeddings)};
}

AttentionResult AttentionDecoder::attention_context(const Tensor& s, const AttentionMemory& memory) const {
  const std::size_t n = memory.nodes.rows();
  Tensor scores;
  if (config_.attention == AttentionKind::additive) {
    scores = matmul(tanh(add_row(memory.projected, attention_state_(s))), attention_v_);
  } else {
    scores = matmul(memory.projected, reshape(s, {config_.hidden_size, 1}));
  }
  Tensor weights = softmax(reshape(scores, {1, n}));
  Tensor context = matmul(weights, memory.nodes);
  return {std::move(context), std::move(weights)};
}

DecoderState AttentionDecoder::init_state(const Tensor& graph_embedding, const AttentionMemory& memory) const {
  if (graph_embedding.size() != memory_dim_) {
    throw DimensionError("graph embedding of shape " + shape_to_string(graph_embedding.shape()) +
                         " does not have dimension " + std::to_string(memory_dim_));
  }
  DecoderState state;
  state.s = tanh(init_(reshape(graph_embedding, {1, memory_dim_})));
  state.cell = Tensor::zeros({1, config_.hidden_size});
  state.context = attention_context(state.s, memory).context;
  state.prev_token = Vocabulary::kBos;
  return state;
}

Tensor AttentionDecoder::advance(const DecoderState& state, const AttentionMemory& memory, DecoderState& next,
                                 Tensor* attention) const {
  if (state.prev_token >= vocab_size_) throw std::out_of_range("decoder input token out of range");
  const Tensor input = concat_cols({row(embedding_, state.prev_token), state.context});
  auto [s, cell] = lstm_.step(input, state.s, state.cell);
  AttentionResult att = attention_context(s, memory);
  Tensor pre_output = concat_cols({s, att.context});
  next.s = std::move(s);
  next.cell = std::move(cell);
  next.context = std::move(att.context);
  if (attention != nullptr) *attention = std::move(att.weights);
  return pre_output;
}

Tensor AttentionDecoder::output_logits(const Tensor& pre_output, Rng* dropout_rng) const {
  if (dropout_rng != nullptr && dropout_ > Real(0)) return output_(dropout(pre_output, dropout_, *dropout_rng));
  return output_(pre_output);
}

StepResult AttentionDecoder::decode_step(const DecoderState& state, const AttentionMemory& memory,
                                         Rng* dropout_rng) const {
  StepResult result;
  const Tensor pre_output = advance(state, memory, result.next, &result.attention);
  result.logits = output_logits(pre_output, dropout_rng);
  result.log_probs = log_softmax(result.logits);
  return result;
}

Tensor AttentionDecoder::sequence_loss(const Tensor& graph_embedding, const AttentionMemory& memory,
                                       std::span<const std::size_t> target, Rng* dropout_rng) const {
  if (target.empty()) throw std::invalid_argument("sequence_loss: empty target");
  if (target.back() != Vocabulary::kEos) throw std::invalid_argument("sequence_loss: target must end with EOS");
  DecoderState state = init_state(graph_embedding, memory);
  std::vector<Tensor> pre_outputs;
  pre_outputs.reserve(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (target[t] >= vocab_size_) throw std::out_of_range("sequence_loss: target id out of range");
    DecoderState next;
    pre_outputs.push_back(advance(state, memory, next, nullptr));
    next.prev_token = target[t];
    state = std::move(next);
  }
  return cross_entropy_sum(output_logits(concat_rows(pre_outputs), dropout_rng), target);
}

std::vector<std::size_t> AttentionDecoder::greedy(const Tensor& graph_embedding, const AttentionMemory& memory,
                                                  std::size_t max_len) const {
  NoGradGuard no_grad;
  std::vector<std::size_t> out;
  DecoderState state = init_state(graph_embedding, memory);
  for (std::size_t t = 0; t < max_len; ++t) {
    StepResult step = decode_step(state, memory, nullptr);
    const std::size_t token = top_k(step.log_probs.values(), 1).front();
    if (token == Vocabulary::kEos) break;
    out.push_back(token);
    state = std::move(step.next);
    state.prev_token = token;
  }
  return out;
}

std::vector<Hypothesis> AttentionDecoder::beam_search(const Tensor& graph_embedding, const AttentionMemory& memory,
                                                      std::size_t beam_size, std::size_t max_len,
                                                      double alpha) const {
  if (beam_size == 0) throw std::invalid_argument("beam_size must be at least 1");
  NoGradGuard no_grad;

  struct Entry {
    Hypothesis hyp;
    DecoderState state;
  };
  std::vector<Entry> beam;
  beam.push_back({Hypothesis{}, init_state(graph_embedding, memory)});

  for (std::size_t t = 0; t < max_len; ++t) {
    const bool all_done = std::all_of(beam.begin(), beam.end(), [](const Entry& e) { return e.hyp.terminated; });
    if (all_done) break;

    std::vector<Entry> candidates;
    for (const Entry& entry : beam) {
      if (entry.hyp.terminated) {
        candidates.push_back(entry);
        continue;
      }
      StepResult step = decode_step(entry.state, memory, nullptr);
      const auto log_probs = step.log_probs.values();
      for (std::size_t token : top_k(log_probs, beam_size)) {
        Entry next{entry.hyp, step.next};
        next.hyp.tokens.push_back(token);
        next.hyp.log_prob += static_cast<double>(log_probs[token]);
        next.hyp.terminated = token == Vocabulary::kEos;
        next.state.prev_token = token;
        candidates.push_back(std::move(next));
      }
    }
    // Candidates are generated in (beam rank, token rank) order, so a stable
    // sort keeps that order among equal scores.
    std::stable_sort(candidates.begin(), candidates.end(), [&](const Entry& a, const Entry& b) {
      return a.hyp.score(alpha) > b.hyp.score(alpha);
    });
    if (candidates.size() > beam_size) candidates.resize(beam_size);
    beam = std::move(candidates);
  }

  std::vector<Hypothesis> out;
  out.reserve(beam.size());
  for (Entry& e : beam) out.push_back(std::move(e.hyp));
  return out;
}

std::vector<std::size_t> AttentionDecoder::best_tokens(const std::vector<Hypothesis>& beam, double alpha) {
  const Hypothesis* best = nullptr;
  for (const bool want_terminated : {true, false}) {
    for (const Hypothesis& h : beam) {
      if (h.terminated != want_terminated) continue;
      if (best == nullptr || h.score(alpha) > best->score(alpha)) best = &h;
    }
    if (best != nullptr) break;
  }
  if (best == nullptr) return {};
  std::vector<std::size_t> tokens = best->tokens;
  if (!tokens.empty() && tokens.back() == Vocabulary::kEos) tokens.pop_back();
  return tokens;
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
