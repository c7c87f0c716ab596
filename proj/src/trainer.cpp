#include "sql2text/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "sql2text/evaluation.hpp"
#include "sql2text/pretrained.hpp"

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

namespace {

double dev_bleu(const Graph2Seq& model, const std::vector<ExamplePair>& dev, const TrainConfig& config) {
  EvaluateOptions options;
  options.generate = model.default_generate_options();
  options.jobs = config.jobs;
  return evaluate_model(model, dev, options).corpus_bleu4;
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<ExamplePair>& train_pairs,
                  const std::vector<ExamplePair>& dev_pairs, const EpochCallback& on_epoch) {
  if (train_pairs.empty()) throw std::invalid_argument("train: empty training set");
  if (config.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (config.eval_every == 0) throw ConfigError("eval_every must be at least 1");
  validate(config.model);

  Rng rng(config.seed);
  Graph2Seq model(config.model, build_vocab(train_pairs, config.min_freq), rng());
  model.set_metadata({{"train_config", to_json(config)}});
  if (!config.pretrained_vectors.empty()) {
    load_pretrained_vectors(config.pretrained_vectors, model.vocabs().source, model.store().get("embedding.source"));
    load_pretrained_vectors(config.pretrained_vectors, model.vocabs().target, model.store().get("embedding.target"));
  }

  AdamOptions adam_options;
  adam_options.learning_rate = config.learning_rate;
  AdamState adam(adam_options);

  TrainResult result{std::move(model), {}, 0, std::nullopt, false};
  Graph2Seq& m = result.model;
  std::vector<std::vector<Real>> best_snapshot;
  std::size_t evals_without_gain = 0;

  std::vector<const ExamplePair*> order(train_pairs.size());
  std::transform(train_pairs.begin(), train_pairs.end(), order.begin(), [](const ExamplePair& p) { return &p; });

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochMetrics metrics;
    metrics.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t token_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const ExamplePair* const> batch(order.data() + start, end - start);
      auto [loss, tokens] = m.batch_loss(batch, &rng);
      const double value = static_cast<double>(loss.item());
      if (!std::isfinite(value)) {
        throw TrainingDiverged("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(start / config.batch_size + 1));
      }
      loss.backward();
      const double norm = clip_gradients(m.store(), config.clip_norm);
      if (norm > config.clip_norm) ++metrics.clipped_batches;
      metrics.batch_grad_norms.push_back(norm);
      adam_step(m.store(), adam);
      loss_sum += value * static_cast<double>(tokens);
      token_sum += tokens;
    }
    metrics.train_loss = loss_sum / static_cast<double>(token_sum);
    metrics.grad_norm_mean =
        std::accumulate(metrics.batch_grad_norms.begin(), metrics.batch_grad_norms.end(), 0.0) /
        static_cast<double>(metrics.batch_grad_norms.size());

    bool stop = false;
    const bool eval_now = !dev_pairs.empty() && (epoch % config.eval_every == 0 || epoch == config.epochs);
    if (eval_now) {
      const double bleu = dev_bleu(m, dev_pairs, config);
      metrics.dev_bleu = bleu;
      if (!result.best_dev_bleu || bleu > *result.best_dev_bleu) {
        result.best_dev_bleu = bleu;
        result.best_epoch = epoch;
        best_snapshot = snapshot_parameters(m.store());
        evals_without_gain = 0;
      } else {
        ++evals_without_gain;
      }
      if (config.patience > 0 && evals_without_gain >= config.patience) stop = true;
      if (config.stop_bleu > 0.0 && bleu >= config.stop_bleu) stop = true;
    }
    result.log.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
    if (stop) {
      result.stopped_early = epoch < config.epochs;
      break;
    }
  }

  if (!best_snapshot.empty()) {
    restore_parameters(m.store(), best_snapshot);
  } else {
    result.best_epoch = result.log.empty() ? 0 : result.log.back().epoch;
  }
  return result;
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
