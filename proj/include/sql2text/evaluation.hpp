#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "sql2text/bleu.hpp"
#include "sql2text/model.hpp"

namespace sql2text {

inline constexpr const char* kToolVersion = "0.1.0";

struct EvaluateOptions {
  GenerateOptions generate;
  std::size_t jobs = 1;  // worker threads for generation
};

inline namespace SQL2TEXT_NUMERIC_NS {

/// Generates a hypothesis for every pair (in parallel when jobs > 1) and
/// scores the corpus. A failed generation is recorded on its example and
/// scored as an empty hypothesis. Throws on an empty pair list.
EvalReport evaluate_model(const Graph2Seq& model, const std::vector<ExamplePair>& pairs,
                          const EvaluateOptions& options);

/// Report JSON: the EvalReport fields plus tool version, model config and
/// its hash, and the checkpoint's training metadata.
nlohmann::ordered_json report_json(const EvalReport& report, const Graph2Seq& model);

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
