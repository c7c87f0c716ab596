#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sql2text/real.hpp"

namespace sql2text {

using Shape = std::vector<std::size_t>;

inline std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

/// Raised by any tensor operation whose operand shapes are incompatible.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Rng = std::mt19937_64;

inline namespace SQL2TEXT_NUMERIC_NS {

struct TensorNode;

/// Dense row-major array taking part in reverse-mode differentiation.
///
/// A Tensor is a shared handle: copies refer to the same storage, so a
/// parameter held by a model component and by the ParameterStore is one
/// object. Operations record their inputs and a backward closure only when
/// gradient recording is enabled and at least one input requires a gradient.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<Real> values, bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);
  static Tensor uniform(Shape shape, Real low, Real high, Rng& rng, bool requires_grad = false);

  explicit operator bool() const { return node_ != nullptr; }

  const Shape& shape() const;
  std::size_t size() const;
  std::size_t ndim() const { return shape().size(); }
  // Matrix view: a 1-D tensor of length n is a 1 x n row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const Real> values() const;
  // In-place access for leaves (initialization, optimizer updates, loading).
  std::span<Real> mutable_values();
  Real item() const;
  Real at(std::size_t index) const;
  Real at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool has_grad() const;
  // Empty span when no gradient has been accumulated yet.
  std::span<const Real> grad() const;
  std::span<Real> mutable_grad();
  void zero_grad();

  /// Accumulates d(this)/d(leaf) into every reachable leaf that requires a
  /// gradient. `this` must hold exactly one element.
  void backward() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }
  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  friend Tensor make_tensor(std::shared_ptr<TensorNode> node);

  std::shared_ptr<TensorNode> node_;
};

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// ---- operations -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
/// x[n x p] * W[p x q] + b[q], b broadcast over rows.
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real factor);
/// Adds a row vector (1-D of length q, or 1 x q) to every row of m[n x q].
Tensor add_row(const Tensor& m, const Tensor& row);

Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_cols(std::initializer_list<Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_rows(std::initializer_list<Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
Tensor row(const Tensor& a, std::size_t index);
Tensor reshape(const Tensor& a, Shape shape);

/// Coordinatewise maximum over the rows of m[n x d], giving 1 x d. The
/// gradient of each coordinate goes to its argmax row; ties resolve to the
/// lowest row index.
Tensor max_over_rows(const Tensor& m);
/// Coordinatewise maximum over equally shaped tensors. Rejects an empty list.
Tensor elementwise_max_reduce(std::span<const Tensor> rows);

/// Softmax along the last dimension, row by row, with max subtraction.
Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);
/// Sum over rows of -log softmax(logits[r])[targets[r]].
Tensor cross_entropy_sum(const Tensor& logits, std::span<const std::size_t> targets);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Inverted dropout: zeroes each element with probability p and scales the
/// survivors by 1/(1-p). Callers skip it outside training.
Tensor dropout(const Tensor& a, Real p, Rng& rng);

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
