#include "sql2text/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace sql2text {
namespace {

constexpr std::size_t kMaxOrder = 4;

struct NgramStats {
  std::array<std::size_t, kMaxOrder> matches{};
  std::array<std::size_t, kMaxOrder> totals{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};

std::unordered_map<std::string, std::size_t> count_ngrams(const TokenList& toks, std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      key += toks[i + k];
      key += '\x1f';
    }
    ++counts[key];
  }
  return counts;
}

NgramStats sentence_stats(const TokenList& hyp, const TokenList& ref) {
  NgramStats s;
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const auto hyp_counts = count_ngrams(hyp, n);
    const auto ref_counts = count_ngrams(ref, n);
    for (const auto& [gram, c] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) s.matches[n - 1] += std::min(c, it->second);
    }
    s.totals[n - 1] = hyp.size() >= n ? hyp.size() - n + 1 : 0;
  }
  return s;
}

double brevity_penalty(std::size_t c, std::size_t r) {
  if (c == 0) return 0.0;
  if (c > r) return 1.0;
  return std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
}

}  // namespace

EvalReport bleu4_corpus(const std::vector<TokenList>& hypotheses, const std::vector<TokenList>& references) {
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument("bleu: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                                std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw std::invalid_argument("bleu: empty corpus");

  EvalReport report;
  NgramStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const NgramStats s = sentence_stats(hypotheses[i], references[i]);
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
      total.matches[n] += s.matches[n];
      total.totals[n] += s.totals[n];
    }
    total.hyp_len += s.hyp_len;
    total.ref_len += s.ref_len;
    report.examples.push_back(ExampleRecord{"", references[i], hypotheses[i],
                                            sentence_bleu_smoothed(hypotheses[i], references[i]), ""});
  }

  double log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    const double p = total.totals[n] == 0 ? 0.0
                                          : static_cast<double>(total.matches[n]) / static_cast<double>(total.totals[n]);
    report.precisions[n] = p;
    if (p == 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  report.brevity_penalty = brevity_penalty(total.hyp_len, total.ref_len);
  report.hypothesis_length = total.hyp_len;
  report.reference_length = total.ref_len;
  report.corpus_bleu4 = any_zero ? 0.0 : report.brevity_penalty * std::exp(log_sum / kMaxOrder);
  return report;
}

double sentence_bleu_smoothed(const TokenList& hypothesis, const TokenList& reference) {
  const NgramStats s = sentence_stats(hypothesis, reference);
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    log_sum += std::log((static_cast<double>(s.matches[n]) + 1.0) / (static_cast<double>(s.totals[n]) + 1.0));
  }
  return brevity_penalty(s.hyp_len, s.ref_len) * std::exp(log_sum / kMaxOrder);
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["corpus_bleu4"] = report.corpus_bleu4;
  j["corpus_bleu4_x100"] = report.corpus_bleu4 * 100.0;
  j["precisions"] = report.precisions;
  j["brevity_penalty"] = report.brevity_penalty;
  j["hypothesis_length"] = report.hypothesis_length;
  j["reference_length"] = report.reference_length;
  j["examples"] = nlohmann::ordered_json::array();
  for (const auto& e : report.examples) {
    nlohmann::ordered_json rec;
    rec["sql"] = e.sql;
    rec["reference"] = e.reference;
    rec["hypothesis"] = e.hypothesis;
    rec["sentence_bleu"] = e.sentence_bleu;
    if (!e.error.empty()) rec["error"] = e.error;
    j["examples"].push_back(std::move(rec));
  }
  return j;
}

}  // namespace sql2text
