#include "sql2text/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

Tensor ParameterStore::add(const std::string& name, Tensor tensor) {
  if (name.empty()) throw std::invalid_argument("parameter name must not be empty");
  if (!tensor || !tensor.requires_grad()) {
    throw std::invalid_argument("parameter '" + name + "' must be a tensor that requires gradients");
  }
  if (!index_.emplace(name, entries_.size()).second) {
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  entries_.emplace_back(name, tensor);
  return tensor;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

const AdamState::Moments& AdamState::moments(const std::string& name) const {
  auto it = moments_.find(name);
  if (it == moments_.end()) throw std::out_of_range("no Adam moments for '" + name + "'");
  return it->second;
}

void adam_step(ParameterStore& store, AdamState& state) {
  const AdamOptions& o = state.options_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  const Real b1 = static_cast<Real>(o.beta1), b2 = static_cast<Real>(o.beta2);

  for (auto& [name, param] : store) {
    auto values = param.mutable_values();
    auto& m = state.moments_[name];
    if (m.first.empty()) {
      m.first.assign(values.size(), Real(0));
      m.second.assign(values.size(), Real(0));
    }
    const auto grad = param.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Real g = grad.empty() ? Real(0) : grad[i];
      m.first[i] = b1 * m.first[i] + (Real(1) - b1) * g;
      m.second[i] = b2 * m.second[i] + (Real(1) - b2) * g * g;
      const double m_hat = static_cast<double>(m.first[i]) / correction1;
      const double v_hat = static_cast<double>(m.second[i]) / correction2;
      values[i] -= static_cast<Real>(o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon));
    }
    param.zero_grad();
  }
}

double gradient_norm(const ParameterStore& store) {
  double total = 0.0;
  for (const auto& [name, param] : store) {
    for (Real g : param.grad()) total += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(total);
}

double clip_gradients(ParameterStore& store, double max_norm) {
  const double norm = gradient_norm(store);
  if (norm > max_norm) {
    const Real factor = static_cast<Real>(max_norm / norm);
    for (auto& [name, param] : store) {
      if (!param.has_grad()) continue;
      for (Real& g : param.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  if (denom == 0.0) return 0.0;
  return std::abs(analytic - numeric) / denom;
}

FiniteDifferenceResult compare_with_finite_differences(const std::function<Tensor(const ParameterStore&)>& loss,
                                                      ParameterStore& store, const FiniteDifferenceOptions& options,
                                                      const AnalyticGradient& analytic) {
  auto evaluate = [&] {
    NoGradGuard guard;
    return static_cast<double>(loss(store).item());
  };
  const double base = evaluate();
  if (evaluate() != base) throw NonDeterministicLoss("loss differs between two identical evaluations");

  // Flattened coordinate space over all parameters.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  std::vector<ParameterStore::Entry*> entries;
  for (auto& entry : store) {
    for (std::size_t i = 0; i < entry.second.size(); ++i) coords.emplace_back(entries.size(), i);
    entries.push_back(&entry);
  }
  if (options.samples < coords.size()) {
    Rng rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.samples);
    std::sort(coords.begin(), coords.end());
  }

  FiniteDifferenceResult result;
  for (const auto& [p, i] : coords) {
    auto& [name, param] = *entries[p];
    const double a = analytic(p, i);
    auto values = param.mutable_values();
    const Real original = values[i];
    const Real plus = static_cast<Real>(original + options.step);
    const Real minus = static_cast<Real>(original - options.step);
    values[i] = plus;
    const double loss_plus = evaluate();
    values[i] = minus;
    const double loss_minus = evaluate();
    values[i] = original;
    // Use the perturbation actually representable in Real.
    const double span = static_cast<double>(plus) - static_cast<double>(minus);
    const double numeric = (loss_plus - loss_minus) / span;
    const double err = relative_error(a, numeric, options.floor);
    if (result.coordinates_checked == 0 || err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_parameter = name;
      result.worst_index = i;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
    result.max_absolute_error = std::max(result.max_absolute_error, std::abs(a - numeric));
    ++result.coordinates_checked;
  }
  return result;
}

FiniteDifferenceResult finite_difference_check(const std::function<Tensor(const ParameterStore&)>& loss,
                                               ParameterStore& store, const FiniteDifferenceOptions& options) {
  store.zero_grad();
  loss(store).backward();
  std::vector<const Tensor*> params;
  for (const auto& [name, param] : store) params.push_back(&param);
  return compare_with_finite_differences(loss, store, options, [&](std::size_t p, std::size_t i) {
    const auto grad = params[p]->grad();
    return grad.empty() ? 0.0 : static_cast<double>(grad[i]);
  });
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
