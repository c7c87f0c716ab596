#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sql2text/config.hpp"
#include "sql2text/parameters.hpp"

namespace sql2text {

/// End-to-end gradient check of the training loss on a small fixture.
struct GradcheckOptions {
  std::string sql = "SELECT COUNT player";
  std::string text = "how many player";
  std::size_t hidden = 8;  // encoder d and decoder hidden size
  std::size_t word_dim = 6;
  std::size_t hop_size = 2;
  GraphEmbeddingMethod ge_method = GraphEmbeddingMethod::pooling;
  AttentionKind attention = AttentionKind::additive;
  // Every parameter, biases included, is drawn uniformly from
  // [-init_scale, init_scale] so that no ReLU sits exactly on its kink.
  double init_scale = 0.5;
  // All coordinates by default.
  FiniteDifferenceOptions fd{1e-4, std::numeric_limits<std::size_t>::max(), 7, 1e-4};
  std::uint64_t seed = 1;
};

/// Parameter values and backward() gradients of the fixture loss.
struct GradientProbe {
  std::string precision;
  double loss = 0.0;
  std::size_t node_count = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> grads;
};

struct GradcheckReport {
  std::string analytic_precision;   // precision of the backward pass
  std::string reference_precision;  // precision of the differenced loss
  std::size_t node_count = 0;
  std::size_t parameter_count = 0;
  double loss = 0.0;
  FiniteDifferenceResult fd;
};

// Both precisions are declared so a binary linking both libraries can pair
// gradients from one with finite differences from the other.
namespace f32 {
GradientProbe analytic_probe(const GradcheckOptions& options);
/// Central differences of this precision's loss at probe.values, compared
/// with probe.grads.
GradcheckReport check_probe(const GradcheckOptions& options, const GradientProbe& probe);
}  // namespace f32
namespace f64 {
GradientProbe analytic_probe(const GradcheckOptions& options);
GradcheckReport check_probe(const GradcheckOptions& options, const GradientProbe& probe);
}  // namespace f64

}  // namespace sql2text
