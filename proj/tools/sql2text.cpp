// sql2text command-line front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or parse error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sql2text/config.hpp"
#include "sql2text/dataset.hpp"
#include "sql2text/evaluation.hpp"
#include "sql2text/gradcheck.hpp"
#include "sql2text/model.hpp"
#include "sql2text/query_forms.hpp"
#include "sql2text/query_graph.hpp"
#include "sql2text/sql.hpp"
#include "sql2text/trainer.hpp"

namespace {

using namespace sql2text;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// SQL given inline (one query per argument) or as a file with one query per
// line; blank lines and lines starting with # are skipped.
struct QueryInput {
  std::vector<std::string> inline_sql;
  std::string file;

  void add_to(CLI::App* cmd) {
    cmd->add_option("sql", inline_sql, "SQL query text");
    cmd->add_option("-f,--file", file, "file with one SQL query per line");
  }

  std::vector<std::string> queries() const {
    if (inline_sql.empty() == file.empty()) throw UsageError("give either SQL text or --file");
    if (file.empty()) return inline_sql;
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      out.push_back(line);
    }
    return out;
  }
};

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

// Runs `fn` on every query; a query that fails to parse is reported on
// stderr and turns the exit code into 2 without stopping the batch.
template <typename Fn>
int for_each_query(const QueryInput& input, bool anonymize, Fn&& fn) {
  int status = kExitOk;
  for (const auto& sql : input.queries()) {
    try {
      fn(parse(sql, ParseOptions{anonymize}));
    } catch (const ParseError& e) {
      std::cerr << "error: " << e.what() << " in: " << sql << '\n';
      status = kExitUsage;
    }
  }
  return status;
}

std::vector<ExamplePair> load_pairs(const std::string& path, bool anonymize) {
  IngestResult result = ingest_dataset(path, ParseOptions{anonymize});
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (result.skipped > 0) std::cerr << path << ": skipped " << result.skipped << " line(s)\n";
  return std::move(result.pairs);
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turn restricted SQL queries into graphs and natural-language interpretations."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  // Configuration: defaults, then the file named by SQL2TEXT_CONFIG, then
  // --config, then individual flags.
  TrainConfig defaults;
  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file (also read from $SQL2TEXT_CONFIG)");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  for (const auto& key : config_keys()) {
    auto* opt = app.add_option("--" + key.name, flag_values[key.name], key.description)
                    ->default_str(key.get(defaults))
                    ->group("Configuration");
    flag_options[key.name] = opt;
  }

  // parse
  auto* cmd_parse = app.add_subcommand("parse", "print the parsed query as JSON, one line per query");
  QueryInput parse_in;
  bool parse_anonymize = false;
  parse_in.add_to(cmd_parse);
  cmd_parse->add_flag("--anonymize", parse_anonymize, "replace values with val_0, val_1, ...");

  // graphify
  auto* cmd_graph = app.add_subcommand("graphify", "print the query graph");
  QueryInput graph_in;
  std::string graph_format = "json";
  bool graph_undirected = false;
  bool graph_super = false;
  graph_in.add_to(cmd_graph);
  cmd_graph->add_option("--format", graph_format, "dot or json")
      ->check(CLI::IsMember({"dot", "json"}))
      ->capture_default_str();
  cmd_graph->add_flag("--undirected", graph_undirected, "mirror every edge");
  cmd_graph->add_flag("--super-node", graph_super, "add the super node used by the node-based graph embedding");

  // template / linearize / tree
  auto* cmd_template = app.add_subcommand("template", "rule-based interpretation of each query");
  QueryInput template_in;
  template_in.add_to(cmd_template);
  auto* cmd_linearize = app.add_subcommand("linearize", "token sequence form of each query");
  QueryInput linearize_in;
  linearize_in.add_to(cmd_linearize);
  auto* cmd_tree = app.add_subcommand("tree", "tree form of each query");
  QueryInput tree_in;
  bool tree_json = false;
  tree_in.add_to(cmd_tree);
  cmd_tree->add_flag("--json", tree_json, "print JSON instead of the bracketed form");

  // train
  auto* cmd_train = app.add_subcommand("train", "train a model and write a checkpoint");
  std::string train_path, dev_path, checkpoint_out, metrics_out;
  cmd_train->add_option("--train", train_path, "training pairs (JSON Lines)")->required();
  cmd_train->add_option("--dev", dev_path, "development pairs (JSON Lines)");
  cmd_train->add_option("-o,--out", checkpoint_out, "checkpoint path")->required();
  cmd_train->add_option("--metrics", metrics_out, "per-epoch CSV log");
  bool train_quiet = false;
  cmd_train->add_flag("-q,--quiet", train_quiet, "no per-epoch progress on stderr");

  // generate
  auto* cmd_generate = app.add_subcommand("generate", "generate interpretations with a trained model");
  std::string generate_ckpt;
  QueryInput generate_in;
  bool generate_greedy = false;
  std::optional<std::size_t> generate_beam;
  cmd_generate->add_option("-c,--checkpoint", generate_ckpt, "checkpoint path")->required();
  generate_in.add_to(cmd_generate);
  cmd_generate->add_flag("--greedy", generate_greedy, "argmax decoding instead of beam search");
  cmd_generate->add_option("--beam-size", generate_beam, "beam width (default: the checkpoint's beam_size)");

  // evaluate
  auto* cmd_evaluate = app.add_subcommand("evaluate", "corpus BLEU-4 of a checkpoint on a test set");
  std::string eval_ckpt, eval_test, eval_report;
  bool eval_greedy = false;
  std::optional<std::size_t> eval_beam;
  cmd_evaluate->add_option("-c,--checkpoint", eval_ckpt, "checkpoint path")->required();
  cmd_evaluate->add_option("--test", eval_test, "test pairs (JSON Lines)")->required();
  cmd_evaluate->add_option("--report", eval_report, "report JSON path (default: stdout)");
  cmd_evaluate->add_flag("--greedy", eval_greedy, "argmax decoding instead of beam search");
  cmd_evaluate->add_option("--beam-size", eval_beam, "beam width (default: the checkpoint's beam_size)");

  // gradcheck
  auto* cmd_gradcheck = app.add_subcommand("gradcheck", "compare loss gradients with central finite differences");
  GradcheckOptions gc;
  int gc_precision = 32;
  cmd_gradcheck->add_option("--precision", gc_precision, "32 or 64 bit backward pass")
      ->check(CLI::IsMember({32, 64}))
      ->capture_default_str();
  cmd_gradcheck->add_option("--samples", gc.fd.samples, "coordinates to check (default: all)");
  cmd_gradcheck->add_option("--step", gc.fd.step, "finite-difference step")->capture_default_str();
  cmd_gradcheck->add_option("--floor", gc.fd.floor, "relative-error denominator floor")->capture_default_str();
  cmd_gradcheck->add_option("--fixture-sql", gc.sql, "fixture query")->capture_default_str();
  cmd_gradcheck->add_option("--fixture-text", gc.text, "fixture interpretation")->capture_default_str();
  cmd_gradcheck->add_option("--size", gc.hidden, "hidden size of encoder and decoder")->capture_default_str();
  cmd_gradcheck->add_option("--fixture-init", gc.init_scale, "parameter range")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    TrainConfig config;
    if (const char* env = std::getenv("SQL2TEXT_CONFIG"); env != nullptr && *env != '\0') {
      apply_config_file(config, env);
    }
    if (!config_path.empty()) apply_config_file(config, config_path);
    for (const auto& [name, opt] : flag_options) {
      if (opt->count() > 0) set_config_value(config, name, flag_values[name]);
    }
    validate(config.model);

    if (*cmd_parse) {
      return for_each_query(parse_in, parse_anonymize || config.anonymize,
                            [](const SqlQuery& q) { std::cout << to_json(q).dump() << '\n'; });
    }
    if (*cmd_graph) {
      return for_each_query(graph_in, config.anonymize, [&](const SqlQuery& q) {
        QueryGraph g = build_graph(q);
        if (graph_undirected) g = to_undirected(g);
        if (graph_super) g = with_super_node(g);
        std::cout << (graph_format == "dot" ? to_dot(g) : to_json(g)) << '\n';
      });
    }
    if (*cmd_template) {
      return for_each_query(template_in, config.anonymize,
                            [](const SqlQuery& q) { std::cout << template_interpret(q) << '\n'; });
    }
    if (*cmd_linearize) {
      return for_each_query(linearize_in, config.anonymize,
                            [](const SqlQuery& q) { std::cout << join(linearize(q)) << '\n'; });
    }
    if (*cmd_tree) {
      return for_each_query(tree_in, config.anonymize, [&](const SqlQuery& q) {
        const TreeNode tree = tree_repr(q);
        if (tree_json) {
          std::function<nlohmann::ordered_json(const TreeNode&)> to_j = [&](const TreeNode& n) {
            nlohmann::ordered_json j{{"label", n.label}, {"children", nlohmann::ordered_json::array()}};
            for (const auto& c : n.children) j["children"].push_back(to_j(c));
            return j;
          };
          std::cout << to_j(tree).dump() << '\n';
        } else {
          std::cout << to_sexpr(tree) << '\n';
        }
      });
    }
    if (*cmd_train) {
      const auto train_pairs = load_pairs(train_path, config.anonymize);
      const auto dev_pairs = dev_path.empty() ? std::vector<ExamplePair>{} : load_pairs(dev_path, config.anonymize);
      if (train_pairs.empty()) throw std::runtime_error("no usable training pairs in " + train_path);
      auto progress = [&](const EpochMetrics& m) {
        if (train_quiet) return;
        std::cerr << "epoch " << m.epoch << " loss " << m.train_loss;
        if (m.dev_bleu) std::cerr << " dev_bleu " << *m.dev_bleu;
        std::cerr << " grad_norm " << m.grad_norm_mean << '\n';
      };
      TrainResult result = train(config, train_pairs, dev_pairs, progress);
      save_checkpoint(result.model, checkpoint_out);
      if (!metrics_out.empty()) {
        write_metrics_csv(metrics_out, result.log);
        write_json_file(metrics_out + ".config.json", to_json(config));
      }
      std::cerr << "best epoch " << result.best_epoch;
      if (result.best_dev_bleu) std::cerr << " dev_bleu " << *result.best_dev_bleu;
      std::cerr << ", checkpoint written to " << checkpoint_out << '\n';
      return kExitOk;
    }
    if (*cmd_generate) {
      const Graph2Seq model = load_checkpoint(generate_ckpt);
      GenerateOptions options = model.default_generate_options();
      options.greedy = generate_greedy;
      if (generate_beam) options.beam_size = *generate_beam;
      if (options.beam_size == 0) throw UsageError("--beam-size must be at least 1");
      return for_each_query(generate_in, config.anonymize,
                            [&](const SqlQuery& q) { std::cout << join(model.generate(q, options)) << '\n'; });
    }
    if (*cmd_evaluate) {
      const Graph2Seq model = load_checkpoint(eval_ckpt);
      EvaluateOptions options;
      options.generate = model.default_generate_options();
      options.generate.greedy = eval_greedy;
      if (eval_beam) options.generate.beam_size = *eval_beam;
      if (options.generate.beam_size == 0) throw UsageError("--beam-size must be at least 1");
      options.jobs = config.jobs;
      const auto pairs = load_pairs(eval_test, config.anonymize);
      const auto report = evaluate_model(model, pairs, options);
      const auto j = report_json(report, model);
      if (eval_report.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        write_json_file(eval_report, j);
        std::cerr << "corpus BLEU-4 " << report.corpus_bleu4 << " over " << pairs.size() << " pairs\n";
      }
      return kExitOk;
    }
    if (*cmd_gradcheck) {
      gc.seed = config.seed;
      // The reference differences are always taken in 64-bit arithmetic.
      const GradientProbe probe = gc_precision == 64 ? f64::analytic_probe(gc) : f32::analytic_probe(gc);
      const GradcheckReport report = f64::check_probe(gc, probe);
      const double tolerance = gc_precision == 64 ? 1e-6 : 1e-3;
      const bool pass = report.fd.max_relative_error < tolerance;
      std::cout << (pass ? "PASS" : "FAIL") << " precision=" << gc_precision
                << " max_relative_error=" << report.fd.max_relative_error << " tolerance=" << tolerance
                << " coordinates=" << report.fd.coordinates_checked << " nodes=" << report.node_count
                << " worst=" << report.fd.worst_parameter << "[" << report.fd.worst_index << "]\n";
      return pass ? kExitOk : kExitFailure;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
