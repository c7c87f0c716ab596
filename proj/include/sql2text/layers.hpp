#pragma once

#include <string>
#include <utility>

#include "sql2text/parameters.hpp"

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

/// Fully connected layer y = x W + b.
struct Linear {
  Tensor weight;  // in x out
  Tensor bias;    // out

  static Linear create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                       Real init_scale, Rng& rng);
  Tensor operator()(const Tensor& x) const { return affine(x, weight, bias); }
  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

/// Single-layer LSTM cell. Gate blocks in column order: input, forget,
/// candidate, output; gates = [x, h] W + b.
struct LstmCell {
  Tensor weight;  // (in + hidden) x 4*hidden
  Tensor bias;    // 4*hidden
  std::size_t hidden = 0;

  static LstmCell create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
                         Real init_scale, Rng& rng);
  /// One step on row vectors; returns (h', c').
  std::pair<Tensor, Tensor> step(const Tensor& x, const Tensor& h, const Tensor& c) const;
};

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
