#include <algorithm>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sql2text/model.hpp"
#include "toy_corpus.hpp"

namespace sql2text {
namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.word_dim = 6;
  c.encoder.hidden_dim = 5;
  c.encoder.hop_size = 2;
  c.decoder.hidden_size = 7;
  c.decoder.max_decode_len = 8;
  c.decoder.beam_size = 3;
  c.init_scale = 0.3;
  return c;
}

struct ModelFixture {
  std::vector<ExamplePair> pairs = testing::template_corpus(6, 11);
  Graph2Seq model{small_config(), build_vocab(pairs, 1), 5};
};

// FNV-1a over all but the trailing hash, rewritten in place.
void rehash(std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i + 8 < bytes.size(); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  std::memcpy(bytes.data() + bytes.size() - 8, &h, 8);
}

void replace_text(std::vector<std::uint8_t>& bytes, const std::string& from, const std::string& to) {
  ASSERT_EQ(from.size(), to.size());
  auto it = std::search(bytes.begin(), bytes.end(), from.begin(), from.end());
  ASSERT_NE(it, bytes.end()) << from;
  std::copy(to.begin(), to.end(), it);
}

TEST(Graph2Seq, TargetIdsEndWithEosAndMapUnknownsToUnk) {
  ModelFixture f;
  const auto ids = f.model.target_ids({"how", "many", "zebras"});
  ASSERT_EQ(ids.size(), 4u);
  EXPECT_EQ(ids.back(), Vocabulary::kEos);
  EXPECT_EQ(ids[2], Vocabulary::kUnk);
}

TEST(Graph2Seq, BatchLossIsTokenAveraged) {
  ModelFixture f;
  const ExamplePair* a = &f.pairs[0];
  const ExamplePair* b = &f.pairs[1];
  const std::vector<const ExamplePair*> one = {a};
  const std::vector<const ExamplePair*> twice = {a, a};
  const auto [loss_one, tokens_one] = f.model.batch_loss(one, nullptr);
  const auto [loss_twice, tokens_twice] = f.model.batch_loss(twice, nullptr);
  EXPECT_EQ(tokens_one, a->target.size() + 1);
  EXPECT_EQ(tokens_twice, 2 * tokens_one);
  EXPECT_NEAR(loss_twice.item(), loss_one.item(), 1e-6);

  const std::vector<const ExamplePair*> both = {a, b};
  const double sum = f.model.example_loss(*a, nullptr).item() + f.model.example_loss(*b, nullptr).item();
  const auto [loss_both, tokens_both] = f.model.batch_loss(both, nullptr);
  EXPECT_NEAR(loss_both.item(), sum / static_cast<double>(tokens_both), 1e-5);
  EXPECT_THROW(f.model.batch_loss(std::vector<const ExamplePair*>{}, nullptr), std::invalid_argument);
}

TEST(Graph2Seq, BeamOneMatchesGreedy) {
  ModelFixture f;
  for (const ExamplePair& p : f.pairs) {
    GenerateOptions greedy{true, 1, 8, 0.0};
    GenerateOptions beam{false, 1, 8, 0.0};
    EXPECT_EQ(f.model.generate(p.query, greedy), f.model.generate(p.query, beam));
  }
}

TEST(Graph2Seq, MoveKeepsParameterHandles) {
  ModelFixture f;
  const auto before = f.model.generate(f.pairs[0].query, f.model.default_generate_options());
  Graph2Seq moved = std::move(f.model);
  EXPECT_EQ(moved.generate(f.pairs[0].query, moved.default_generate_options()), before);
}

TEST(Graph2Seq, SnapshotRestoresParameters) {
  ModelFixture f;
  const auto snap = snapshot_parameters(f.model.store());
  for (auto& [name, t] : f.model.store()) {
    for (Real& v : t.mutable_values()) v += Real(1);
  }
  restore_parameters(f.model.store(), snap);
  EXPECT_EQ(snapshot_parameters(f.model.store()), snap);
  EXPECT_THROW(restore_parameters(f.model.store(), {}), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsByteIdenticalAndBitwiseEqual) {
  ModelFixture f;
  f.model.set_metadata({{"note", "probe"}});
  const auto bytes = serialize_checkpoint(f.model);
  EXPECT_EQ(std::memcmp(bytes.data(), kCheckpointMagic, 8), 0);
  const Graph2Seq loaded = deserialize_checkpoint(bytes);
  EXPECT_EQ(serialize_checkpoint(loaded), bytes);
  EXPECT_EQ(snapshot_parameters(loaded.store()), snapshot_parameters(f.model.store()));
  EXPECT_EQ(loaded.vocabs().source, f.model.vocabs().source);
  EXPECT_EQ(loaded.vocabs().target, f.model.vocabs().target);
  EXPECT_EQ(loaded.metadata()["note"], "probe");
}

TEST(Checkpoint, GenerationIsReproducedAfterLoad) {
  ModelFixture f;
  const auto path = std::filesystem::temp_directory_path() / "sql2text_model_test.ckpt";
  save_checkpoint(f.model, path.string());
  const Graph2Seq loaded = load_checkpoint(path.string());
  std::filesystem::remove(path);
  for (const ExamplePair& p : f.pairs) {
    for (bool greedy : {true, false}) {
      GenerateOptions o = f.model.default_generate_options();
      o.greedy = greedy;
      EXPECT_EQ(loaded.generate_ids(p.query, o), f.model.generate_ids(p.query, o));
    }
  }
}

TEST(Checkpoint, ArchitectureMismatchIsReported) {
  ModelFixture f;
  const auto bytes = serialize_checkpoint(f.model);
  ModelConfig wrong = small_config();
  wrong.word_dim = 300;
  try {
    deserialize_checkpoint(bytes, &wrong);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("word_dim"), std::string::npos) << e.what();
  }
  // Non-architectural settings may differ.
  ModelConfig other = small_config();
  other.dropout = 0.1;
  other.decoder.beam_size = 9;
  EXPECT_NO_THROW(deserialize_checkpoint(bytes, &other));
}

TEST(Checkpoint, CorruptInputsAreRejected) {
  ModelFixture f;
  const auto good = serialize_checkpoint(f.model);

  auto magic = good;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(magic), CheckpointError);

  auto flipped = good;
  flipped[good.size() / 2] ^= 0x40;
  EXPECT_THROW(deserialize_checkpoint(flipped), CheckpointError);

  for (std::size_t keep : {std::size_t{0}, std::size_t{7}, std::size_t{20}, good.size() - 1}) {
    const std::vector<std::uint8_t> cut(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(keep));
    EXPECT_THROW(deserialize_checkpoint(cut), CheckpointError) << keep;
  }

  auto version = good;
  version[8] = 99;
  rehash(version);
  try {
    deserialize_checkpoint(version);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }

  auto precision = good;
  replace_text(precision, std::string("\"precision\":\"") + kPrecisionName + "\"",
               std::string("\"precision\":\"") + (std::string(kPrecisionName) == "f32" ? "f64" : "f32") + "\"");
  rehash(precision);
  try {
    deserialize_checkpoint(precision);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("precision"), std::string::npos);
  }

  EXPECT_THROW(load_checkpoint("/nonexistent/dir/model.ckpt"), CheckpointError);
}

TEST(Checkpoint, CorruptionNeverEscapesAsOtherErrorsProperty) {
  ModelFixture f;
  const auto good = serialize_checkpoint(f.model);
  testing::Gen g(77);
  for (int trial = 0; trial < 300; ++trial) {
    auto bad = good;
    const std::size_t flips = 1 + testing::pick(g, 4);
    for (std::size_t i = 0; i < flips; ++i) bad[testing::pick(g, bad.size())] ^= static_cast<std::uint8_t>(1 + testing::pick(g, 255));
    // Half the time the checksum is repaired so the header parser is reached.
    if (testing::coin(g)) rehash(bad);
    try {
      deserialize_checkpoint(bad);
    } catch (const CheckpointError&) {
    }
  }
}

}  // namespace
}  // namespace sql2text
