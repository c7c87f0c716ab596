#include "sql2text/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

struct TensorNode {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  std::vector<Real>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), Real(0));
    return grad;
  }
};

Tensor make_tensor(std::shared_ptr<TensorNode> node) { return Tensor(std::move(node)); }

namespace {

thread_local bool g_grad_enabled = true;

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
}

std::size_t rows_of(const Shape& s) { return s.size() == 1 ? 1 : product(s) / s.back(); }
std::size_t cols_of(const Shape& s) { return s.back(); }

const TensorNode& node_of(const Tensor& t) {
  if (!t) throw std::logic_error("operation on an empty Tensor handle");
  return *t.node();
}

// Builds the result of an operation. The backward closure and the parent
// links are kept only when some input needs a gradient.
Tensor make_result(Shape shape, std::vector<Real> value, std::initializer_list<const Tensor*> inputs,
                   std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (g_grad_enabled) {
    for (const Tensor* in : inputs) needs = needs || in->requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const Tensor* in : inputs) node->parents.push_back(in->node());
    node->backward_fn = std::move(backward_fn);
  }
  return make_tensor(std::move(node));
}

Tensor make_result_n(Shape shape, std::vector<Real> value, std::span<const Tensor> inputs,
                     std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (g_grad_enabled) {
    for (const Tensor& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const Tensor& in : inputs) node->parents.push_back(in.node());
    node->backward_fn = std::move(backward_fn);
  }
  return make_tensor(std::move(node));
}

// Parent accumulation helper: skips parents that do not need a gradient.
template <typename F>
void accumulate_into(TensorNode& parent, F&& f) {
  if (!parent.requires_grad) return;
  f(parent.ensure_grad());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

void require_matrix(const Tensor& a, const char* op) {
  if (a.ndim() > 2) {
    throw DimensionError(std::string(op) + ": expected a matrix or vector, got " + shape_to_string(a.shape()));
  }
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  const auto& in = node_of(a).value;
  std::vector<Real> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return make_result(a.shape(), std::move(out), {&a}, [deriv](TensorNode& self) {
    TensorNode& p = *self.parents[0];
    accumulate_into(p, [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(p.value[i], self.value[i]);
    });
  });
}

}  // namespace

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), Real(0), requires_grad); }

Tensor Tensor::full(Shape shape, Real value, bool requires_grad) {
  check_shape(shape);
  std::vector<Real> values(product(shape), value);
  return from_values(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::from_values(Shape shape, std::vector<Real> values, bool requires_grad) {
  check_shape(shape);
  if (values.size() != product(shape)) {
    throw DimensionError("tensor of shape " + shape_to_string(shape) + " needs " + std::to_string(product(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(Real value, bool requires_grad) { return from_values({1}, {value}, requires_grad); }

Tensor Tensor::uniform(Shape shape, Real low, Real high, Rng& rng, bool requires_grad) {
  check_shape(shape);
  std::uniform_real_distribution<double> dist(low, high);
  std::vector<Real> values(product(shape));
  for (Real& v : values) v = static_cast<Real>(dist(rng));
  return from_values(std::move(shape), std::move(values), requires_grad);
}

const Shape& Tensor::shape() const { return node_of(*this).shape; }
std::size_t Tensor::size() const { return node_of(*this).value.size(); }
std::size_t Tensor::rows() const { return rows_of(shape()); }
std::size_t Tensor::cols() const { return cols_of(shape()); }

std::span<const Real> Tensor::values() const { return node_of(*this).value; }
std::span<Real> Tensor::mutable_values() {
  node_of(*this);
  return node_->value;
}

Real Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  return values()[0];
}

Real Tensor::at(std::size_t index) const { return values()[index]; }
Real Tensor::at(std::size_t r, std::size_t c) const { return values()[r * cols() + c]; }

bool Tensor::requires_grad() const { return node_of(*this).requires_grad; }
bool Tensor::has_grad() const { return !node_of(*this).grad.empty(); }
std::span<const Real> Tensor::grad() const { return node_of(*this).grad; }
std::span<Real> Tensor::mutable_grad() {
  node_of(*this);
  return node_->ensure_grad();
}
void Tensor::zero_grad() {
  node_of(*this);
  std::fill(node_->grad.begin(), node_->grad.end(), Real(0));
}

void Tensor::backward() const {
  const TensorNode& root_ref = node_of(*this);
  if (root_ref.value.size() != 1) {
    throw DimensionError("backward() needs a scalar loss, got shape " + shape_to_string(root_ref.shape));
  }
  if (!root_ref.requires_grad) return;

  // Iterative post-order DFS; graphs from long decodes are deep.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      TensorNode* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  // Interior gradients are recomputed from scratch on every call; leaves
  // accumulate across calls.
  for (TensorNode* n : order) {
    if (n->backward_fn) n->grad.assign(n->value.size(), Real(0));
  }
  node_->ensure_grad()[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

// ---- linear algebra ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t n = a.rows(), p = a.cols(), q = b.cols();
  if (b.rows() != p) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  const auto& av = node_of(a).value;
  const auto& bv = node_of(b).value;
  std::vector<Real> out(n * q, Real(0));
  for (std::size_t i = 0; i < n; ++i) {
    Real* orow = out.data() + i * q;
    for (std::size_t k = 0; k < p; ++k) {
      const Real x = av[i * p + k];
      if (x == Real(0)) continue;
      const Real* brow = bv.data() + k * q;
      for (std::size_t j = 0; j < q; ++j) orow[j] += x * brow[j];
    }
  }
  return make_result({n, q}, std::move(out), {&a, &b}, [n, p, q](TensorNode& self) {
    TensorNode& pa = *self.parents[0];
    TensorNode& pb = *self.parents[1];
    const auto& g = self.grad;
    accumulate_into(pa, [&](std::vector<Real>& ga) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < p; ++k) {
          const Real* brow = pb.value.data() + k * q;
          const Real* grow = g.data() + i * q;
          Real acc = 0;
          for (std::size_t j = 0; j < q; ++j) acc += grow[j] * brow[j];
          ga[i * p + k] += acc;
        }
      }
    });
    accumulate_into(pb, [&](std::vector<Real>& gb) {
      for (std::size_t i = 0; i < n; ++i) {
        const Real* grow = g.data() + i * q;
        for (std::size_t k = 0; k < p; ++k) {
          const Real x = pa.value[i * p + k];
          if (x == Real(0)) continue;
          Real* gbrow = gb.data() + k * q;
          for (std::size_t j = 0; j < q; ++j) gbrow[j] += x * grow[j];
        }
      }
    });
  });
}

Tensor add_row(const Tensor& m, const Tensor& r) {
  require_matrix(m, "add_row");
  const std::size_t n = m.rows(), q = m.cols();
  if (r.size() != q || r.rows() != 1) {
    throw DimensionError("add_row: row " + shape_to_string(r.shape()) + " does not broadcast over " +
                         shape_to_string(m.shape()));
  }
  const auto& mv = node_of(m).value;
  const auto& rv = node_of(r).value;
  std::vector<Real> out(mv);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < q; ++j) out[i * q + j] += rv[j];
  return make_result(m.shape(), std::move(out), {&m, &r}, [n, q](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
    accumulate_into(*self.parents[1], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j) g[j] += self.grad[i * q + j];
    });
  });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_matrix(x, "affine");
  require_matrix(weight, "affine");
  if (x.cols() != weight.rows()) {
    throw DimensionError("affine: input " + shape_to_string(x.shape()) + " does not match weight " +
                         shape_to_string(weight.shape()));
  }
  if (bias.size() != weight.cols() || bias.rows() != 1) {
    throw DimensionError("affine: bias " + shape_to_string(bias.shape()) + " does not match weight " +
                         shape_to_string(weight.shape()));
  }
  return add_row(matmul(x, weight), bias);
}

// ---- elementwise --------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto& av = node_of(a).value;
  const auto& bv = node_of(b).value;
  std::vector<Real> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_result(a.shape(), std::move(out), {&a, &b}, [](TensorNode& self) {
    for (auto& parent : self.parents) {
      accumulate_into(*parent, [&](std::vector<Real>& g) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      });
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto& av = node_of(a).value;
  const auto& bv = node_of(b).value;
  std::vector<Real> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_result(a.shape(), std::move(out), {&a, &b}, [](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
    accumulate_into(*self.parents[1], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    });
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto& av = node_of(a).value;
  const auto& bv = node_of(b).value;
  std::vector<Real> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_result(a.shape(), std::move(out), {&a, &b}, [](TensorNode& self) {
    TensorNode& pa = *self.parents[0];
    TensorNode& pb = *self.parents[1];
    accumulate_into(pa, [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
    });
    accumulate_into(pb, [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
    });
  });
}

Tensor scale(const Tensor& a, Real factor) {
  return unary(a, [factor](Real x) { return x * factor; }, [factor](Real, Real) { return factor; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](Real x) { return x > Real(0) ? x : Real(0); },
      [](Real x, Real) { return x > Real(0) ? Real(1) : Real(0); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](Real x) { return std::tanh(x); }, [](Real, Real y) { return Real(1) - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](Real x) {
        if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
        const Real e = std::exp(x);
        return e / (Real(1) + e);
      },
      [](Real, Real y) { return y * (Real(1) - y); });
}

// ---- structural ---------------------------------------------------------------

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t n = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& t : parts) {
    require_matrix(t, "concat_cols");
    if (t.rows() != n) {
      throw DimensionError("concat_cols: row counts disagree, " + shape_to_string(parts[0].shape()) + " vs " +
                           shape_to_string(t.shape()));
    }
    widths.push_back(t.cols());
    total += t.cols();
  }
  std::vector<Real> out(n * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = node_of(parts[k]).value;
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(v.data() + i * widths[k], widths[k], out.data() + i * total + offset);
    offset += widths[k];
  }
  return make_result_n({n, total}, std::move(out), parts, [n, total, widths](TensorNode& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      accumulate_into(*self.parents[k], [&](std::vector<Real>& g) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j) g[i * widths[k] + j] += self.grad[i * total + off + j];
      });
      off += widths[k];
    }
  });
}

Tensor concat_cols(std::initializer_list<Tensor> parts) {
  return concat_cols(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t q = parts[0].cols();
  std::size_t n = 0;
  for (const Tensor& t : parts) {
    require_matrix(t, "concat_rows");
    if (t.cols() != q) {
      throw DimensionError("concat_rows: column counts disagree, " + shape_to_string(parts[0].shape()) + " vs " +
                           shape_to_string(t.shape()));
    }
    n += t.rows();
  }
  std::vector<Real> out;
  out.reserve(n * q);
  for (const Tensor& t : parts) {
    const auto& v = node_of(t).value;
    out.insert(out.end(), v.begin(), v.end());
  }
  return make_result_n({n, q}, std::move(out), parts, [](TensorNode& self) {
    std::size_t off = 0;
    for (auto& parent : self.parents) {
      const std::size_t len = parent->value.size();
      accumulate_into(*parent, [&](std::vector<Real>& g) {
        for (std::size_t i = 0; i < len; ++i) g[i] += self.grad[off + i];
      });
      off += len;
    }
  });
}

Tensor concat_rows(std::initializer_list<Tensor> parts) {
  return concat_rows(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_matrix(a, "slice_cols");
  const std::size_t n = a.rows(), q = a.cols();
  if (count == 0 || begin + count > q) {
    throw DimensionError("slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + shape_to_string(a.shape()));
  }
  const auto& v = node_of(a).value;
  std::vector<Real> out(n * count);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(v.data() + i * q + begin, count, out.data() + i * count);
  return make_result({n, count}, std::move(out), {&a}, [n, q, begin, count](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < count; ++j) g[i * q + begin + j] += self.grad[i * count + j];
    });
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  require_matrix(a, "gather_rows");
  if (rows.empty()) throw DimensionError("gather_rows: empty row list");
  const std::size_t n = a.rows(), q = a.cols();
  const auto& v = node_of(a).value;
  std::vector<Real> out(rows.size() * q);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n) {
      throw DimensionError("gather_rows: row " + std::to_string(rows[i]) + " out of range for " +
                           shape_to_string(a.shape()));
    }
    std::copy_n(v.data() + rows[i] * q, q, out.data() + i * q);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return make_result({rows.size(), q}, std::move(out), {&a}, [idx = std::move(idx), q](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < q; ++j) g[idx[i] * q + j] += self.grad[i * q + j];
    });
  });
}

Tensor row(const Tensor& a, std::size_t index) {
  const std::size_t idx[1] = {index};
  return gather_rows(a, idx);
}

Tensor reshape(const Tensor& a, Shape shape) {
  check_shape(shape);
  if (product(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(a.shape()) + " as " + shape_to_string(shape));
  }
  std::vector<Real> out(node_of(a).value);
  return make_result(std::move(shape), std::move(out), {&a}, [](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
  });
}

// ---- reductions -----------------------------------------------------------------

Tensor max_over_rows(const Tensor& m) {
  require_matrix(m, "max_over_rows");
  const std::size_t n = m.rows(), d = m.cols();
  const auto& v = node_of(m).value;
  std::vector<Real> out(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
  std::vector<std::size_t> argmax(d, 0);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (v[i * d + j] > out[j]) {
        out[j] = v[i * d + j];
        argmax[j] = i;
      }
    }
  }
  return make_result({1, d}, std::move(out), {&m}, [argmax = std::move(argmax), d](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (std::size_t j = 0; j < d; ++j) g[argmax[j] * d + j] += self.grad[j];
    });
  });
}

Tensor elementwise_max_reduce(std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("elementwise_max_reduce: empty input");
  for (const Tensor& r : rows) require_same_shape(rows[0], r, "elementwise_max_reduce");
  std::vector<Tensor> flat;
  flat.reserve(rows.size());
  for (const Tensor& r : rows) flat.push_back(reshape(r, {1, r.size()}));
  return reshape(max_over_rows(concat_rows(flat)), rows[0].shape());
}

Tensor softmax(const Tensor& x) {
  const std::size_t n = x.rows(), q = x.cols();
  const auto& v = node_of(x).value;
  std::vector<Real> out(v.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Real* in = v.data() + i * q;
    Real* o = out.data() + i * q;
    const Real mx = *std::max_element(in, in + q);
    Real total = 0;
    for (std::size_t j = 0; j < q; ++j) total += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < q; ++j) o[j] /= total;
  }
  return make_result(x.shape(), std::move(out), {&x}, [n, q](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < n; ++i) {
        const Real* y = self.value.data() + i * q;
        const Real* gy = self.grad.data() + i * q;
        Real dot = 0;
        for (std::size_t j = 0; j < q; ++j) dot += gy[j] * y[j];
        for (std::size_t j = 0; j < q; ++j) g[i * q + j] += y[j] * (gy[j] - dot);
      }
    });
  });
}

namespace {

Real row_log_sum_exp(const Real* in, std::size_t q) {
  const Real mx = *std::max_element(in, in + q);
  Real total = 0;
  for (std::size_t j = 0; j < q; ++j) total += std::exp(in[j] - mx);
  return mx + std::log(total);
}

}  // namespace

Tensor log_softmax(const Tensor& x) {
  const std::size_t n = x.rows(), q = x.cols();
  const auto& v = node_of(x).value;
  std::vector<Real> out(v.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Real lse = row_log_sum_exp(v.data() + i * q, q);
    for (std::size_t j = 0; j < q; ++j) out[i * q + j] = v[i * q + j] - lse;
  }
  return make_result(x.shape(), std::move(out), {&x}, [n, q](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (std::size_t i = 0; i < n; ++i) {
        const Real* ls = self.value.data() + i * q;
        const Real* gy = self.grad.data() + i * q;
        Real total = 0;
        for (std::size_t j = 0; j < q; ++j) total += gy[j];
        for (std::size_t j = 0; j < q; ++j) g[i * q + j] += gy[j] - std::exp(ls[j]) * total;
      }
    });
  });
}

Tensor cross_entropy_sum(const Tensor& logits, std::span<const std::size_t> targets) {
  require_matrix(logits, "cross_entropy_sum");
  const std::size_t n = logits.rows(), q = logits.cols();
  if (targets.size() != n) {
    throw DimensionError("cross_entropy_sum: " + std::to_string(targets.size()) + " targets for logits " +
                         shape_to_string(logits.shape()));
  }
  const auto& v = node_of(logits).value;
  Real loss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] >= q) throw DimensionError("cross_entropy_sum: target id out of range");
    loss += row_log_sum_exp(v.data() + i * q, q) - v[i * q + targets[i]];
  }
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return make_result({1}, {loss}, {&logits}, [n, q, tgt = std::move(tgt)](TensorNode& self) {
    TensorNode& p = *self.parents[0];
    accumulate_into(p, [&](std::vector<Real>& g) {
      const Real gl = self.grad[0];
      for (std::size_t i = 0; i < n; ++i) {
        const Real* in = p.value.data() + i * q;
        const Real mx = *std::max_element(in, in + q);
        Real total = 0;
        for (std::size_t j = 0; j < q; ++j) total += std::exp(in[j] - mx);
        for (std::size_t j = 0; j < q; ++j) g[i * q + j] += gl * std::exp(in[j] - mx) / total;
        g[i * q + tgt[i]] -= gl;
      }
    });
  });
}

Tensor sum(const Tensor& a) {
  Real total = 0;
  for (Real v : node_of(a).value) total += v;
  return make_result({1}, {total}, {&a}, [](TensorNode& self) {
    accumulate_into(*self.parents[0], [&](std::vector<Real>& g) {
      for (Real& gi : g) gi += self.grad[0];
    });
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), Real(1) / static_cast<Real>(a.size())); }

Tensor dropout(const Tensor& a, Real p, Rng& rng) {
  if (p < Real(0) || p >= Real(1)) throw std::invalid_argument("dropout: probability must be in [0, 1)");
  if (p == Real(0)) return a;
  std::bernoulli_distribution keep(1.0 - static_cast<double>(p));
  const Real factor = Real(1) / (Real(1) - p);
  std::vector<Real> mask(a.size());
  for (Real& m : mask) m = keep(rng) ? factor : Real(0);
  return mul(a, Tensor::from_values(a.shape(), std::move(mask)));
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
