#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace sql2text {

using TokenList = std::vector<std::string>;

struct ExampleRecord {
  std::string sql;
  TokenList reference;
  TokenList hypothesis;
  double sentence_bleu = 0.0;  // add-one smoothed, diagnostics only
  std::string error;           // set when generation failed
};

/// Corpus-level BLEU-4 with a single reference per hypothesis.
struct EvalReport {
  double corpus_bleu4 = 0.0;
  std::array<double, 4> precisions{};  // modified n-gram precisions p1..p4
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  std::vector<ExampleRecord> examples;
};

/// Pools clipped n-gram matches over the corpus before taking ratios;
/// BLEU = BP * exp(mean log p_n), BP = exp(1 - r/c) when c <= r.
EvalReport bleu4_corpus(const std::vector<TokenList>& hypotheses, const std::vector<TokenList>& references);

/// Sentence BLEU-4 with add-one smoothing on every p_n.
double sentence_bleu_smoothed(const TokenList& hypothesis, const TokenList& reference);

nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace sql2text
