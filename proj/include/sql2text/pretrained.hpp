#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "sql2text/tensor.hpp"
#include "sql2text/vocabulary.hpp"

namespace sql2text {

class PretrainedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PretrainedCoverage {
  std::size_t matched = 0;   // vocabulary tokens whose row was replaced
  std::size_t eligible = 0;  // vocabulary tokens other than the specials
  double coverage() const { return eligible == 0 ? 0.0 : static_cast<double>(matched) / eligible; }
};

inline namespace SQL2TEXT_NUMERIC_NS {

/// Reads whitespace-separated "token v1 ... vD" lines and copies the vector
/// of every vocabulary token found into its row of `embedding`
/// (|vocab| x D). Rows of other tokens are left untouched. A line whose
/// vector length differs from D is an error.
PretrainedCoverage load_pretrained_vectors(const std::string& path, const Vocabulary& vocab, Tensor& embedding);

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
