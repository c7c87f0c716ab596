#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sql2text/tensor.hpp"

namespace sql2text {

struct FiniteDifferenceOptions {
  double step = 1e-4;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  // Relative error denominator is max(|analytic|, |numeric|, floor).
  double floor = 0.0;
};

struct FiniteDifferenceResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline namespace SQL2TEXT_NUMERIC_NS {

/// Named trainable tensors in registration order.
class ParameterStore {
 public:
  using Entry = std::pair<std::string, Tensor>;

  /// Registers a new leaf. Names must be unique and the tensor must require
  /// gradients.
  Tensor add(const std::string& name, Tensor tensor);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);

  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  void zero_grad();

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-parameter first and second moments plus the shared step counter.
class AdamState {
 public:
  struct Moments {
    std::vector<Real> first;
    std::vector<Real> second;
  };

  explicit AdamState(AdamOptions options = {}) : options_(options) {}

  const AdamOptions& options() const { return options_; }
  std::uint64_t step_count() const { return step_; }
  const Moments& moments(const std::string& name) const;

 private:
  friend void adam_step(ParameterStore& store, AdamState& state);

  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

/// Bias-corrected Adam update of every parameter, then zeroes the gradients.
/// Parameters without an accumulated gradient are treated as having a zero
/// gradient.
void adam_step(ParameterStore& store, AdamState& state);

/// Global L2 norm over all parameter gradients.
double gradient_norm(const ParameterStore& store);

/// Rescales all gradients by max_norm/g when the global norm g exceeds
/// max_norm. Returns g measured before clipping.
double clip_gradients(ParameterStore& store, double max_norm);

class NonDeterministicLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double relative_error(double analytic, double numeric, double floor = 0.0);

/// Compares backward() gradients against central differences
/// (L(p+h) - L(p-h)) / 2h on a seeded sample of coordinates (all of them if
/// `samples` covers the store). The loss must be deterministic.
FiniteDifferenceResult finite_difference_check(const std::function<Tensor(const ParameterStore&)>& loss,
                                               ParameterStore& store, const FiniteDifferenceOptions& options);

/// Gradient value for (parameter position in the store, flat index).
using AnalyticGradient = std::function<double(std::size_t, std::size_t)>;

/// Same comparison with externally supplied gradients, e.g. computed at
/// another precision on the same parameter values.
FiniteDifferenceResult compare_with_finite_differences(const std::function<Tensor(const ParameterStore&)>& loss,
                                                      ParameterStore& store, const FiniteDifferenceOptions& options,
                                                      const AnalyticGradient& analytic);

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
