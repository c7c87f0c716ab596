#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sql2text/evaluation.hpp"
#include "sql2text/trainer.hpp"
#include "toy_corpus.hpp"

namespace sql2text {
namespace {

TrainConfig memorize_config() {
  TrainConfig c;
  c.model.word_dim = 16;
  c.model.encoder.hidden_dim = 16;
  c.model.encoder.hop_size = 2;
  c.model.decoder.hidden_size = 16;
  c.model.decoder.beam_size = 3;
  c.model.decoder.max_decode_len = 30;
  c.model.init_scale = 0.2;
  c.model.dropout = 0;
  c.batch_size = 5;
  c.epochs = 400;
  c.patience = 0;
  c.learning_rate = 0.01;
  c.stop_bleu = 0.999;
  c.eval_every = 10;
  return c;
}

// One memorized model shared by the tests below.
const TrainResult& memorized() {
  static const std::vector<ExamplePair> pairs = testing::template_corpus(5, 21);
  static const TrainResult result = train(memorize_config(), pairs, pairs);
  return result;
}

const std::vector<ExamplePair>& memorized_pairs() {
  static const std::vector<ExamplePair> pairs = testing::template_corpus(5, 21);
  return pairs;
}

EvaluateOptions beam_options(const Graph2Seq& model, std::size_t jobs = 1) {
  EvaluateOptions o;
  o.generate = model.default_generate_options();
  o.jobs = jobs;
  return o;
}

TEST(EvaluateModel, MemorizedCorpusScoresNearOne) {
  const Graph2Seq& model = memorized().model;
  const EvalReport report = evaluate_model(model, memorized_pairs(), beam_options(model));
  EXPECT_GE(report.corpus_bleu4, 0.99);
  ASSERT_EQ(report.examples.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(report.examples[i].sql, memorized_pairs()[i].sql);
    EXPECT_EQ(report.examples[i].reference, memorized_pairs()[i].target);
    EXPECT_TRUE(report.examples[i].error.empty());
  }
}

TEST(EvaluateModel, EmptyPairListIsAnError) {
  const Graph2Seq& model = memorized().model;
  EXPECT_THROW(evaluate_model(model, {}, beam_options(model)), std::invalid_argument);
}

TEST(EvaluateModel, ReportIsByteIdenticalAcrossRunsAndThreadCounts) {
  const auto pairs = testing::template_corpus(12, 4);
  TrainConfig c = memorize_config();
  c.epochs = 3;
  c.stop_bleu = 0;
  const TrainResult first = train(c, pairs, {});
  const TrainResult second = train(c, pairs, {});
  const std::string a = report_json(evaluate_model(first.model, pairs, beam_options(first.model)), first.model).dump();
  const std::string b =
      report_json(evaluate_model(second.model, pairs, beam_options(second.model)), second.model).dump();
  EXPECT_EQ(a, b);
  const std::string parallel =
      report_json(evaluate_model(first.model, pairs, beam_options(first.model, 4)), first.model).dump();
  EXPECT_EQ(a, parallel);
}

TEST(EvaluateModel, GenerationFailureIsRecordedAndScoredEmpty) {
  const Graph2Seq& model = memorized().model;
  EvaluateOptions o = beam_options(model);
  o.generate.beam_size = 0;
  const EvalReport report = evaluate_model(model, memorized_pairs(), o);
  EXPECT_EQ(report.corpus_bleu4, 0.0);
  EXPECT_EQ(report.hypothesis_length, 0u);
  for (const ExampleRecord& r : report.examples) {
    EXPECT_TRUE(r.hypothesis.empty());
    EXPECT_FALSE(r.error.empty());
  }
}

TEST(ReportJson, CarriesVersionConfigHashAndTrainingMetadata) {
  const Graph2Seq& model = memorized().model;
  const auto j = report_json(evaluate_model(model, memorized_pairs(), beam_options(model)), model);
  EXPECT_EQ(j["tool_version"], kToolVersion);
  const std::string hash = j["config_hash"];
  EXPECT_EQ(hash.size(), 16u);
  EXPECT_EQ(hash.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(j["model_config"]["word_dim"], 16);
  EXPECT_TRUE(j.contains("training"));
  EXPECT_EQ(j["training"]["train_config"]["lr"], get_config_value(memorize_config(), "lr"));
  EXPECT_DOUBLE_EQ(j["corpus_bleu4_x100"].get<double>(), 100 * j["corpus_bleu4"].get<double>());
  EXPECT_EQ(j["examples"].size(), 5u);
}

}  // namespace
}  // namespace sql2text
