#include "sql2text/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sql2text/query_graph.hpp"

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

Graph2Seq::Graph2Seq(const ModelConfig& config, Vocabularies vocabs, std::uint64_t seed)
    : config_(std::make_unique<ModelConfig>(config)),
      vocabs_(std::make_unique<Vocabularies>(std::move(vocabs))),
      store_(std::make_unique<ParameterStore>()) {
  validate(*config_);
  Rng rng(seed);
  const Real scale = static_cast<Real>(config_->init_scale);
  encoder_ = std::make_unique<GraphEncoder>(config_->encoder, vocabs_->source.size(), config_->word_dim, scale,
                                            *store_, rng);
  decoder_ = std::make_unique<AttentionDecoder>(config_->decoder, vocabs_->target.size(), config_->word_dim,
                                                2 * config_->encoder.hidden_dim,
                                                static_cast<Real>(config_->dropout), scale, *store_, rng);
}

GraphEncoding Graph2Seq::encode(const SqlQuery& query) const {
  return encoder_->encode(build_graph(query), vocabs_->source);
}

std::vector<std::size_t> Graph2Seq::target_ids(const std::vector<std::string>& target) const {
  std::vector<std::size_t> ids = vocabs_->target.encode(target);
  ids.push_back(Vocabulary::kEos);
  return ids;
}

Tensor Graph2Seq::example_loss(const ExamplePair& pair, Rng* dropout_rng) const {
  const GraphEncoding enc = encode(pair.query);
  const AttentionMemory memory = decoder_->prepare_memory(enc.nodes.final);
  const std::vector<std::size_t> ids = target_ids(pair.target);
  return decoder_->sequence_loss(enc.graph_embedding, memory, ids, dropout_rng);
}

std::pair<Tensor, std::size_t> Graph2Seq::batch_loss(std::span<const ExamplePair* const> batch,
                                                     Rng* dropout_rng) const {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  std::vector<Tensor> losses;
  std::size_t tokens = 0;
  for (const ExamplePair* pair : batch) {
    losses.push_back(reshape(example_loss(*pair, dropout_rng), {1, 1}));
    tokens += pair->target.size() + 1;
  }
  Tensor total = sum(concat_rows(losses));
  return {scale(total, Real(1) / static_cast<Real>(tokens)), tokens};
}

GenerateOptions Graph2Seq::default_generate_options() const {
  GenerateOptions options;
  options.beam_size = config_->decoder.beam_size;
  options.max_decode_len = config_->decoder.max_decode_len;
  options.length_norm_alpha = config_->decoder.length_norm_alpha;
  return options;
}

std::vector<std::size_t> Graph2Seq::generate_ids(const SqlQuery& query, const GenerateOptions& options) const {
  NoGradGuard no_grad;
  const GraphEncoding enc = encode(query);
  const AttentionMemory memory = decoder_->prepare_memory(enc.nodes.final);
  if (options.greedy) return decoder_->greedy(enc.graph_embedding, memory, options.max_decode_len);
  const auto beam = decoder_->beam_search(enc.graph_embedding, memory, options.beam_size, options.max_decode_len,
                                          options.length_norm_alpha);
  return AttentionDecoder::best_tokens(beam, options.length_norm_alpha);
}

std::vector<std::string> Graph2Seq::generate(const SqlQuery& query, const GenerateOptions& options) const {
  return vocabs_->target.decode(generate_ids(query, options));
}

// ---- checkpoints ----------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)).data(), sizeof(T));
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw CheckpointError("checkpoint is truncated");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Keys that change the parameter layout; decoding options may differ freely.
constexpr const char* kArchitectureKeys[] = {"word_dim",   "hop_size",   "hidden_dim",     "share_direction_weights",
                                             "ge_method", "undirected", "decoder_hidden", "attention"};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Graph2Seq& model) {
  nlohmann::ordered_json header;
  header["precision"] = kPrecisionName;
  header["model"] = to_json(model.config());
  header["source_vocab"] = model.vocabs().source.to_json();
  header["target_vocab"] = model.vocabs().target.to_json();
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const auto& [name, tensor] : model.store()) {
    params.push_back({{"name", name}, {"shape", tensor.shape()}});
  }
  header["parameters"] = std::move(params);
  header["metadata"] = model.metadata();
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + 8);
  put(out, kCheckpointVersion);
  put(out, static_cast<std::uint64_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, tensor] : model.store()) {
    for (Real v : tensor.values()) put(out, v);
  }
  put(out, fnv1a(out));
  return out;
}

void save_checkpoint(const Graph2Seq& model, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing " + path);
}

Graph2Seq deserialize_checkpoint(std::span<const std::uint8_t> bytes, const ModelConfig* expected) {
  if (bytes.size() < 8 + 4 + 8 + 8 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  std::uint64_t stored_hash;
  std::memcpy(&stored_hash, bytes.data() + bytes.size() - 8, 8);
  if (fnv1a(bytes.first(bytes.size() - 8)) != stored_hash) throw CheckpointError("checkpoint checksum mismatch");

  Reader in(bytes.first(bytes.size() - 8));
  in.take(8);
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = in.get<std::uint64_t>();
  const auto header_bytes = in.take(static_cast<std::size_t>(header_len));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_bytes.begin(), header_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }

  try {
    const std::string precision = header.at("precision").get<std::string>();
    if (precision != kPrecisionName) {
      throw CheckpointError("checkpoint precision " + precision + " does not match this build (" + kPrecisionName +
                            ")");
    }
    const ModelConfig config = model_config_from_json(header.at("model"));
    if (expected != nullptr) {
      const auto want = to_json(*expected);
      const auto have = to_json(config);
      std::string mismatches;
      for (const char* key : kArchitectureKeys) {
        if (want.at(key) != have.at(key)) {
          if (!mismatches.empty()) mismatches += ", ";
          mismatches += std::string(key) + " (checkpoint " + have.at(key).dump() + ", requested " +
                        want.at(key).dump() + ")";
        }
      }
      if (!mismatches.empty()) throw CheckpointError("checkpoint config mismatch: " + mismatches);
    }
    Vocabularies vocabs{Vocabulary::from_json(header.at("source_vocab")),
                        Vocabulary::from_json(header.at("target_vocab"))};
    Graph2Seq model(config, std::move(vocabs), 0);

    const auto& params = header.at("parameters");
    if (params.size() != model.store().size()) throw CheckpointError("checkpoint parameter count mismatch");
    std::size_t i = 0;
    for (auto& [name, tensor] : model.store()) {
      const auto& entry = params.at(i++);
      if (entry.at("name").get<std::string>() != name || entry.at("shape").get<Shape>() != tensor.shape()) {
        throw CheckpointError("checkpoint parameter " + entry.at("name").get<std::string>() +
                              " does not match model parameter " + name + " " + shape_to_string(tensor.shape()));
      }
      for (Real& v : tensor.mutable_values()) v = in.get<Real>();
    }
    if (in.position() != bytes.size() - 8) throw CheckpointError("trailing bytes after checkpoint parameters");
    // Re-read with insertion order kept so a reload saves identical bytes.
    auto ordered = nlohmann::ordered_json::parse(header_bytes.begin(), header_bytes.end());
    model.set_metadata(std::move(ordered.at("metadata")));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("invalid checkpoint config: ") + e.what());
  }
}

Graph2Seq load_checkpoint(const std::string& path, const ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes, expected);
}

std::vector<std::vector<Real>> snapshot_parameters(const ParameterStore& store) {
  std::vector<std::vector<Real>> out;
  out.reserve(store.size());
  for (const auto& [name, tensor] : store) out.emplace_back(tensor.values().begin(), tensor.values().end());
  return out;
}

void restore_parameters(ParameterStore& store, const std::vector<std::vector<Real>>& snapshot) {
  if (snapshot.size() != store.size()) throw std::invalid_argument("restore_parameters: snapshot size mismatch");
  std::size_t i = 0;
  for (auto& [name, tensor] : store) {
    auto values = tensor.mutable_values();
    if (values.size() != snapshot[i].size()) throw std::invalid_argument("restore_parameters: shape mismatch");
    std::copy(snapshot[i].begin(), snapshot[i].end(), values.begin());
    ++i;
  }
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
