#include "sql2text/layers.hpp"

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

Linear Linear::create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                      Real init_scale, Rng& rng) {
  Linear layer;
  layer.weight = store.add(prefix + ".weight", Tensor::uniform({in, out}, -init_scale, init_scale, rng, true));
  layer.bias = store.add(prefix + ".bias", Tensor::zeros({out}, true));
  return layer;
}

LstmCell LstmCell::create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
                          Real init_scale, Rng& rng) {
  LstmCell cell;
  cell.hidden = hidden;
  cell.weight =
      store.add(prefix + ".weight", Tensor::uniform({in + hidden, 4 * hidden}, -init_scale, init_scale, rng, true));
  cell.bias = store.add(prefix + ".bias", Tensor::zeros({4 * hidden}, true));
  return cell;
}

std::pair<Tensor, Tensor> LstmCell::step(const Tensor& x, const Tensor& h, const Tensor& c) const {
  const Tensor gates = affine(concat_cols({x, h}), weight, bias);
  const Tensor input_gate = sigmoid(slice_cols(gates, 0, hidden));
  const Tensor forget_gate = sigmoid(slice_cols(gates, hidden, hidden));
  const Tensor candidate = tanh(slice_cols(gates, 2 * hidden, hidden));
  const Tensor output_gate = sigmoid(slice_cols(gates, 3 * hidden, hidden));
  Tensor cell = add(mul(forget_gate, c), mul(input_gate, candidate));
  Tensor out = mul(output_gate, tanh(cell));
  return {std::move(out), std::move(cell)};
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
