#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sql2text/config.hpp"
#include "sql2text/dataset.hpp"
#include "sql2text/model.hpp"

namespace sql2text {

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // token-averaged over the epoch
  std::optional<double> dev_bleu;
  double grad_norm_mean = 0.0;  // mean pre-clip gradient norm over batches
  std::size_t clipped_batches = 0;
  std::vector<double> batch_grad_norms;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// epoch,train_loss,dev_bleu,grad_norm_mean (dev_bleu empty when skipped).
void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& log);
void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& log);

inline namespace SQL2TEXT_NUMERIC_NS {

struct TrainResult {
  Graph2Seq model;  // best-dev parameters, or the last epoch's without dev data
  std::vector<EpochMetrics> log;
  std::size_t best_epoch = 0;
  std::optional<double> best_dev_bleu;
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Builds vocabularies from `train_pairs`, initializes the model from the
/// seed, and runs Adam over seeded shuffled mini-batches with gradient
/// clipping. Dev BLEU (beam search) is measured every `eval_every` epochs;
/// the parameters of the best dev epoch are kept. Throws TrainingDiverged
/// on a non-finite loss.
TrainResult train(const TrainConfig& config, const std::vector<ExamplePair>& train_pairs,
                  const std::vector<ExamplePair>& dev_pairs, const EpochCallback& on_epoch = {});

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
