#include "sql2text/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sql2text {
namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string lo = v;
  for (char& c : lo) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lo == "true" || lo == "1" || lo == "yes" || lo == "on") return true;
  if (lo == "false" || lo == "0" || lo == "no" || lo == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string format_real(double v) {
  if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    char tmp[64];
    std::snprintf(tmp, sizeof tmp, "%.*g", prec, v);
    if (std::stod(tmp) == v) return tmp;
  }
  return buf;
}

std::string ge_name(GraphEmbeddingMethod m) { return m == GraphEmbeddingMethod::pooling ? "pooling" : "supernode"; }

GraphEmbeddingMethod ge_from(const std::string& key, const std::string& v) {
  if (v == "pooling" || v == "pge") return GraphEmbeddingMethod::pooling;
  if (v == "supernode" || v == "nge") return GraphEmbeddingMethod::supernode;
  throw ConfigError(key + ": expected pooling or supernode, got '" + v + "'");
}

std::string attention_name(AttentionKind k) { return k == AttentionKind::additive ? "additive" : "dot"; }

AttentionKind attention_from(const std::string& key, const std::string& v) {
  if (v == "additive") return AttentionKind::additive;
  if (v == "dot") return AttentionKind::dot;
  throw ConfigError(key + ": expected additive or dot, got '" + v + "'");
}

#define COUNT_KEY(name, field, desc)                                                            \
  ConfigKey {                                                                                   \
    name, desc, [](const TrainConfig& c) { return std::to_string(c.field); },                   \
        [](TrainConfig& c, const std::string& v) { c.field = parse_count(name, v); }            \
  }
#define REAL_KEY(name, field, desc)                                                             \
  ConfigKey {                                                                                   \
    name, desc, [](const TrainConfig& c) { return format_real(c.field); },                      \
        [](TrainConfig& c, const std::string& v) { c.field = parse_real(name, v); }             \
  }
#define BOOL_KEY(name, field, desc)                                                             \
  ConfigKey {                                                                                   \
    name, desc, [](const TrainConfig& c) { return std::string(c.field ? "true" : "false"); },   \
        [](TrainConfig& c, const std::string& v) { c.field = parse_bool(name, v); }             \
  }

std::vector<ConfigKey> make_keys() {
  return {
      REAL_KEY("lr", learning_rate, "Adam learning rate"),
      COUNT_KEY("batch_size", batch_size, "examples per mini-batch"),
      REAL_KEY("dropout", model.dropout, "decoder dropout probability"),
      REAL_KEY("clip_norm", clip_norm, "global gradient-norm clipping threshold"),
      COUNT_KEY("word_dim", model.word_dim, "word embedding dimension"),
      COUNT_KEY("hop_size", model.encoder.hop_size, "graph encoder hops K"),
      COUNT_KEY("hidden_dim", model.encoder.hidden_dim, "graph encoder hidden size d"),
      COUNT_KEY("decoder_hidden", model.decoder.hidden_size, "decoder hidden state size"),
      BOOL_KEY("share_direction_weights", model.encoder.share_direction_weights,
               "one W^k for both directions instead of separate forward/backward matrices"),
      ConfigKey{"ge_method", "graph embedding: pooling or supernode",
                [](const TrainConfig& c) { return ge_name(c.model.encoder.ge_method); },
                [](TrainConfig& c, const std::string& v) { c.model.encoder.ge_method = ge_from("ge_method", v); }},
      BOOL_KEY("undirected", model.encoder.undirected, "treat query graphs as undirected"),
      ConfigKey{"attention", "attention scoring: additive or dot",
                [](const TrainConfig& c) { return attention_name(c.model.decoder.attention); },
                [](TrainConfig& c, const std::string& v) { c.model.decoder.attention = attention_from("attention", v); }},
      COUNT_KEY("max_decode_len", model.decoder.max_decode_len, "maximum generated tokens"),
      COUNT_KEY("beam_size", model.decoder.beam_size, "beam width at inference"),
      REAL_KEY("length_norm_alpha", model.decoder.length_norm_alpha, "beam score = logp / len^alpha"),
      REAL_KEY("init_scale", model.init_scale, "uniform initialization range"),
      COUNT_KEY("epochs", epochs, "maximum training epochs"),
      COUNT_KEY("patience", patience, "epochs without dev improvement before stopping (0 = off)"),
      REAL_KEY("stop_bleu", stop_bleu, "stop once dev BLEU reaches this value (0 = off)"),
      COUNT_KEY("eval_every", eval_every, "dev evaluation interval in epochs"),
      COUNT_KEY("seed", seed, "seed for every random choice"),
      COUNT_KEY("min_freq", min_freq, "minimum token frequency kept in vocabularies"),
      BOOL_KEY("anonymize", anonymize, "replace SQL values with val_k placeholders"),
      ConfigKey{"pretrained_vectors", "word vector file (token followed by word_dim reals per line)",
                [](const TrainConfig& c) { return c.pretrained_vectors; },
                [](TrainConfig& c, const std::string& v) { c.pretrained_vectors = v; }},
      COUNT_KEY("jobs", jobs, "worker threads for generation"),
  };
}

#undef COUNT_KEY
#undef REAL_KEY
#undef BOOL_KEY

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

void set_config_value(TrainConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.set(config, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::string get_config_value(const TrainConfig& config, const std::string& key) {
  for (const auto& k : config_keys()) {
    if (k.name == key) return k.get(config);
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_file(TrainConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

nlohmann::ordered_json to_json(const TrainConfig& config) {
  nlohmann::ordered_json j;
  for (const auto& k : config_keys()) j[k.name] = k.get(config);
  return j;
}

nlohmann::ordered_json to_json(const ModelConfig& m) {
  nlohmann::ordered_json j;
  j["word_dim"] = m.word_dim;
  j["dropout"] = m.dropout;
  j["init_scale"] = m.init_scale;
  j["hop_size"] = m.encoder.hop_size;
  j["hidden_dim"] = m.encoder.hidden_dim;
  j["share_direction_weights"] = m.encoder.share_direction_weights;
  j["ge_method"] = ge_name(m.encoder.ge_method);
  j["undirected"] = m.encoder.undirected;
  j["decoder_hidden"] = m.decoder.hidden_size;
  j["max_decode_len"] = m.decoder.max_decode_len;
  j["beam_size"] = m.decoder.beam_size;
  j["length_norm_alpha"] = m.decoder.length_norm_alpha;
  j["attention"] = attention_name(m.decoder.attention);
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig m;
  try {
    m.word_dim = j.at("word_dim").get<std::size_t>();
    m.dropout = j.at("dropout").get<double>();
    m.init_scale = j.at("init_scale").get<double>();
    m.encoder.hop_size = j.at("hop_size").get<std::size_t>();
    m.encoder.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    m.encoder.share_direction_weights = j.at("share_direction_weights").get<bool>();
    m.encoder.ge_method = ge_from("ge_method", j.at("ge_method").get<std::string>());
    m.encoder.undirected = j.at("undirected").get<bool>();
    m.decoder.hidden_size = j.at("decoder_hidden").get<std::size_t>();
    m.decoder.max_decode_len = j.at("max_decode_len").get<std::size_t>();
    m.decoder.beam_size = j.at("beam_size").get<std::size_t>();
    m.decoder.length_norm_alpha = j.at("length_norm_alpha").get<double>();
    m.decoder.attention = attention_from("attention", j.at("attention").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  validate(m);
  return m;
}

std::string config_hash(const nlohmann::ordered_json& j) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const ModelConfig& m) {
  if (m.word_dim == 0) throw ConfigError("word_dim must be positive");
  if (m.encoder.hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
  if (m.decoder.hidden_size == 0) throw ConfigError("decoder_hidden must be positive");
  if (m.decoder.beam_size == 0) throw ConfigError("beam_size must be at least 1");
  if (m.decoder.max_decode_len == 0) throw ConfigError("max_decode_len must be at least 1");
  if (m.dropout < 0.0 || m.dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (m.init_scale <= 0.0) throw ConfigError("init_scale must be positive");
}

}  // namespace sql2text
