#include "sql2text/gradcheck.hpp"

#include <random>
#include <stdexcept>

#include "sql2text/model.hpp"

namespace sql2text {
inline namespace SQL2TEXT_NUMERIC_NS {

namespace {

struct Fixture {
  ExamplePair pair;
  Graph2Seq model;

  explicit Fixture(const GradcheckOptions& o) : pair(make_pair(o.sql, o.text)), model(config(o), vocabs(pair), o.seed) {
    // Biases start at zero, which puts every ReLU fed by a dead row exactly
    // on its kink. The check is valid at any point, so draw all parameters.
    Rng rng(o.seed);
    std::uniform_real_distribution<double> dist(-o.init_scale, o.init_scale);
    for (auto& [name, param] : model.store()) {
      for (Real& v : param.mutable_values()) v = static_cast<Real>(dist(rng));
    }
  }

  Tensor loss() const {
    const ExamplePair* batch[] = {&pair};
    return model.batch_loss(batch, nullptr).first;
  }

  static ModelConfig config(const GradcheckOptions& o) {
    ModelConfig c;
    c.word_dim = o.word_dim;
    c.dropout = 0.0;
    c.init_scale = o.init_scale;
    c.encoder.hidden_dim = o.hidden;
    c.encoder.hop_size = o.hop_size;
    c.encoder.ge_method = o.ge_method;
    c.decoder.hidden_size = o.hidden;
    c.decoder.attention = o.attention;
    return c;
  }

  static Vocabularies vocabs(const ExamplePair& pair) { return build_vocab({pair}, 1); }
};

}  // namespace

GradientProbe analytic_probe(const GradcheckOptions& options) {
  Fixture fx(options);
  GradientProbe probe;
  probe.precision = kPrecisionName;
  probe.node_count = fx.model.encode(fx.pair.query).graph.nodes.size();
  fx.model.store().zero_grad();
  const Tensor loss = fx.loss();
  probe.loss = static_cast<double>(loss.item());
  loss.backward();
  for (const auto& [name, param] : fx.model.store()) {
    probe.names.push_back(name);
    probe.values.emplace_back(param.values().begin(), param.values().end());
    const auto grad = param.grad();
    if (grad.empty()) {
      probe.grads.emplace_back(param.size(), 0.0);
    } else {
      probe.grads.emplace_back(grad.begin(), grad.end());
    }
  }
  return probe;
}

GradcheckReport check_probe(const GradcheckOptions& options, const GradientProbe& probe) {
  Fixture fx(options);
  ParameterStore& store = fx.model.store();
  if (store.size() != probe.names.size()) throw std::invalid_argument("gradient probe does not match the fixture");
  std::size_t p = 0;
  for (auto& [name, param] : store) {
    if (name != probe.names[p] || param.size() != probe.values[p].size()) {
      throw std::invalid_argument("gradient probe parameter " + probe.names[p] + " does not match " + name);
    }
    auto values = param.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<Real>(probe.values[p][i]);
    ++p;
  }

  GradcheckReport report;
  report.analytic_precision = probe.precision;
  report.reference_precision = kPrecisionName;
  report.node_count = probe.node_count;
  report.parameter_count = store.parameter_count();
  report.loss = probe.loss;
  report.fd = compare_with_finite_differences([&](const ParameterStore&) { return fx.loss(); }, store, options.fd,
                                              [&](std::size_t param, std::size_t i) { return probe.grads[param][i]; });
  return report;
}

}  // namespace SQL2TEXT_NUMERIC_NS
}  // namespace sql2text
