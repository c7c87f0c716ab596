#include "sql2text/pretrained.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

PretrainedCoverage load_pretrained_vectors(const std::string& path, const Vocabulary& vocab, Tensor& embedding) {
  if (embedding.ndim() != 2 || embedding.rows() != vocab.size()) {
    throw DimensionError("embedding " + shape_to_string(embedding.shape()) + " does not match a vocabulary of " +
                         std::to_string(vocab.size()) + " tokens");
  }
  std::ifstream in(path);
  if (!in) throw PretrainedError("cannot open pretrained vectors " + path);

  const std::size_t dim = embedding.cols();
  auto values = embedding.mutable_values();
  std::vector<bool> seen(vocab.size(), false);
  PretrainedCoverage result;
  result.eligible = vocab.size() - Vocabulary::kNumSpecials;

  std::string line;
  std::size_t line_no = 0;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    vec.clear();
    std::string field;
    while (fields >> field) {
      try {
        std::size_t used = 0;
        vec.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw PretrainedError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (vec.size() != dim) {
      throw PretrainedError(path + ":" + std::to_string(line_no) + ": vector has dimension " +
                            std::to_string(vec.size()) + ", expected word_dim " + std::to_string(dim));
    }
    if (!vocab.contains(token)) continue;
    const std::size_t id = vocab.id(token);
    if (id < Vocabulary::kNumSpecials) continue;
    for (std::size_t j = 0; j < dim; ++j) values[id * dim + j] = static_cast<Real>(vec[j]);
    if (!seen[id]) {
      seen[id] = true;
      ++result.matched;
    }
  }
  return result;
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
