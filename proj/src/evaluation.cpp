#include "sql2text/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

EvalReport evaluate_model(const Graph2Seq& model, const std::vector<ExamplePair>& pairs,
                          const EvaluateOptions& options) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_model: no pairs to evaluate");

  std::vector<TokenList> hypotheses(pairs.size());
  std::vector<std::string> errors(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        hypotheses[i] = model.generate(pairs[i].query, options.generate);
      } catch (const std::exception& e) {
        hypotheses[i].clear();
        errors[i] = e.what();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, pairs.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
  }

  std::vector<TokenList> references;
  references.reserve(pairs.size());
  for (const auto& pair : pairs) references.push_back(pair.target);
  EvalReport report = bleu4_corpus(hypotheses, references);
  report.examples.clear();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ExampleRecord record;
    record.sql = pairs[i].sql;
    record.reference = references[i];
    record.hypothesis = hypotheses[i];
    record.sentence_bleu = sentence_bleu_smoothed(hypotheses[i], references[i]);
    record.error = errors[i];
    report.examples.push_back(std::move(record));
  }
  return report;
}

nlohmann::ordered_json report_json(const EvalReport& report, const Graph2Seq& model) {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  const auto config = to_json(model.config());
  j["config_hash"] = config_hash(config);
  j["model_config"] = config;
  if (!model.metadata().empty()) j["training"] = model.metadata();
  const auto fields = to_json(report);
  for (const auto& [key, value] : fields.items()) j[key] = value;
  return j;
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
