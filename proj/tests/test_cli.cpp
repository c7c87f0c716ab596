#include <sys/wait.h>

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "sql2text/config.hpp"
#include "toy_corpus.hpp"

namespace sql2text {
namespace {

namespace fs = std::filesystem;

const char* kFigureQuery =
    "SELECT company WHERE assets > val0 AND sales > val0 AND industry <= val1 AND profits = val2";

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("sql2text_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  RunResult run(const std::vector<std::string>& args, const std::string& env = "") const {
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += quote(SQL2TEXT_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " > " + quote((dir / "stdout").string()) + " 2> " + quote((dir / "stderr").string());
    RunResult r;
    const int raw = std::system(cmd.c_str());
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(dir / "stdout");
    r.err = slurp(dir / "stderr");
    return r;
  }

  fs::path write(const std::string& name, const std::string& content) const {
    std::ofstream(dir / name) << content;
    return dir / name;
  }

  fs::path write_pairs(const std::string& name, const std::vector<ExamplePair>& pairs) const {
    std::string text;
    for (const auto& p : pairs) {
      std::string sentence;
      for (const auto& t : p.target) sentence += (sentence.empty() ? "" : " ") + t;
      text += nlohmann::json{{"sql", p.sql}, {"text", sentence}}.dump() + "\n";
    }
    return write(name, text);
  }
};

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Minimal DOT checker for the subset the tool emits:
//   (di)graph ID { (node [attrs]; | node -> node [attrs]?;)* }
bool valid_dot(const std::string& text) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') j += text[j] == '\\' ? 2 : 1;
      if (j >= text.size()) return false;
      tokens.push_back("\"");
      i = j + 1;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      tokens.push_back(text.substr(i, j - i));
      i = j;
    } else if (text.compare(i, 2, "->") == 0 || text.compare(i, 2, "--") == 0) {
      tokens.push_back(text.substr(i, 2));
      i += 2;
    } else {
      tokens.push_back(std::string(1, c));
      ++i;
    }
  }
  std::size_t p = 0;
  auto at = [&](const std::string& t) { return p < tokens.size() && tokens[p] == t; };
  auto id = [&] {
    if (p < tokens.size() && (tokens[p] == "\"" || std::isalnum(static_cast<unsigned char>(tokens[p][0])))) {
      ++p;
      return true;
    }
    return false;
  };
  auto attrs = [&] {
    if (!at("[")) return true;
    ++p;
    while (!at("]")) {
      if (!id() || !at("=")) return false;
      ++p;
      if (!id()) return false;
      if (at(",") || at(";")) ++p;
    }
    ++p;
    return true;
  };
  std::string edge_op;
  if (at("digraph")) {
    edge_op = "->";
  } else if (at("graph")) {
    edge_op = "--";
  } else {
    return false;
  }
  ++p;
  if (!id() || !at("{")) return false;
  ++p;
  while (!at("}")) {
    if (p >= tokens.size()) return false;
    if (at("node") || at("edge") || at("graph")) {
      ++p;
      if (!attrs()) return false;
    } else {
      if (!id()) return false;
      if (at(edge_op)) {
        ++p;
        if (!id()) return false;
      } else if (at("->") || at("--")) {
        return false;
      }
      if (!attrs()) return false;
    }
    if (at(";")) ++p;
  }
  return p + 1 == tokens.size();
}

TEST(DotChecker, AcceptsAndRejects) {
  EXPECT_TRUE(valid_dot("digraph q { n0 [label=\"a \\\"b\\\"\"]; n0 -> n1; }"));
  EXPECT_FALSE(valid_dot("digraph q { n0 -- n1; }"));
  EXPECT_FALSE(valid_dot("digraph q { n0 -> ; }"));
  EXPECT_FALSE(valid_dot("digraph q { n0 [label=\"open]; }"));
}

TEST_F(Cli, ParseFigureQueryHasFourConditions) {
  const RunResult r = run({"parse", kFigureQuery});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["conditions"], 4);
  EXPECT_EQ(j["where"]["children"].size(), 4u);
  EXPECT_EQ(j["select"], nlohmann::json({"company"}));
}

TEST_F(Cli, MalformedQueryExitsTwo) {
  const RunResult r = run({"parse", "SELECT FROM WHERE"});
  EXPECT_EQ(r.status, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(Cli, QueryFileGivesOneLinePerQuery) {
  const auto file = write("q.sql", "SELECT a\n# comment\n\nSELECT b WHERE c = 1\nSELECT COUNT d\n");
  const RunResult r = run({"parse", "--file", file.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto out = lines(r.out);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& line : out) EXPECT_TRUE(nlohmann::json::accept(line)) << line;

  // A bad line is reported, the rest still run, and the exit code is 2.
  const auto mixed = write("m.sql", "SELECT a\nSELECT a JOIN b\nSELECT c\n");
  const RunResult m = run({"parse", "-f", mixed.string()});
  EXPECT_EQ(m.status, 2);
  EXPECT_EQ(lines(m.out).size(), 2u);
  EXPECT_EQ(run({"parse", "-f", (dir / "missing.sql").string()}).status, 1);
  EXPECT_EQ(run({"parse"}).status, 2);
}

TEST_F(Cli, GraphifyJsonAndUndirected) {
  const RunResult r = run({"graphify", "--format", "json", kFigureQuery});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["nodes"].size(), 10u);
  EXPECT_EQ(j["edges"].size(), 10u);
  const auto u = nlohmann::json::parse(run({"graphify", "--format", "json", "--undirected", kFigureQuery}).out);
  EXPECT_EQ(u["edges"].size(), 20u);
}

TEST_F(Cli, GraphifyDotIsWellFormed) {
  for (const std::vector<std::string>& extra :
       {std::vector<std::string>{}, {"--undirected"}, {"--super-node"}}) {
    std::vector<std::string> args = {"graphify", "--format", "dot"};
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back(kFigureQuery);
    const RunResult r = run(args);
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(valid_dot(r.out)) << r.out;
  }
  const RunResult quoted = run({"graphify", "--format", "dot", "SELECT a WHERE b = 'say \"hi\"'"});
  EXPECT_TRUE(valid_dot(quoted.out)) << quoted.out;
  EXPECT_EQ(run({"graphify", "--format", "xml", "SELECT a"}).status, 2);
}

TEST_F(Cli, TemplateSentences) {
  EXPECT_EQ(run({"template", kFigureQuery}).out,
            "which company where assets more than val_0 and sales more than val_0 and industry less than or equal to "
            "val_1 and profits equals val_2\n");
  EXPECT_EQ(run({"template", "SELECT name"}).out, "which name\n");
  EXPECT_EQ(run({"template", "SELECT COUNT player WHERE team = val0"}).out.rfind("how many", 0), 0u);
}

TEST_F(Cli, LinearizeAndTree) {
  EXPECT_EQ(run({"linearize", "SELECT a WHERE b = 1 AND c > 2"}).out, "select <sep> a where b = 1 <sep> c > 2\n");
  const RunResult tree = run({"tree", "--json", "SELECT a"});
  ASSERT_EQ(tree.status, 0) << tree.err;
  EXPECT_EQ(nlohmann::json::parse(tree.out)["label"], "Query");
}

TEST_F(Cli, HelpListsEveryConfigKeyWithDefault) {
  const RunResult r = run({"--help"});
  ASSERT_EQ(r.status, 0);
  const TrainConfig defaults;
  for (const auto& key : config_keys()) {
    const auto pos = r.out.find("--" + key.name + " ");
    ASSERT_NE(pos, std::string::npos) << key.name;
    const std::string line = r.out.substr(pos, r.out.find('\n', pos) - pos);
    const std::string value = key.get(defaults);
    if (!value.empty()) {
      EXPECT_NE(line.find(value), std::string::npos) << key.name << ": " << line;
    }
  }
}

TEST_F(Cli, ConfigSourcesAndErrors) {
  // The anonymize switch is observable through parse.
  const auto on = write("on.cfg", "# comment\nanonymize = true\n");
  const auto off = write("off.cfg", "anonymize = false\n");
  const std::string sql = "SELECT a WHERE b = 'texas'";
  EXPECT_NE(run({"parse", sql}).out.find("texas"), std::string::npos);
  EXPECT_NE(run({"--config", on.string(), "parse", sql}).out.find("val_0"), std::string::npos);
  EXPECT_NE(run({"parse", sql}, "SQL2TEXT_CONFIG=" + quote(on.string())).out.find("val_0"), std::string::npos);
  // --config overrides the environment, and flags override both.
  EXPECT_NE(run({"--config", off.string(), "parse", sql}, "SQL2TEXT_CONFIG=" + quote(on.string())).out.find("texas"),
            std::string::npos);
  EXPECT_NE(run({"--config", on.string(), "--anonymize", "false", "parse", sql}).out.find("texas"),
            std::string::npos);

  const auto unknown = write("bad.cfg", "no_such_key = 1\n");
  EXPECT_EQ(run({"--config", unknown.string(), "parse", "SELECT a"}).status, 2);
  EXPECT_EQ(run({"--lr", "fast", "parse", "SELECT a"}).status, 2);
  EXPECT_EQ(run({"--no-such-flag", "parse", "SELECT a"}).status, 2);
  EXPECT_EQ(run({"frobnicate"}).status, 2);
}

TEST_F(Cli, GradcheckDefaultPasses) {
  const RunResult r = run({"gradcheck"});
  EXPECT_EQ(r.status, 0) << r.out << r.err;
  ASSERT_EQ(r.out.rfind("PASS", 0), 0u) << r.out;
  const auto pos = r.out.find("max_relative_error=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(r.out.substr(pos + 19)), 1e-3);
  const RunResult wide = run({"gradcheck", "--precision", "64"});
  EXPECT_EQ(wide.status, 0) << wide.out;
}

class CliTrained : public Cli {
 protected:
  std::vector<ExamplePair> pairs = testing::template_corpus(5, 21);
  fs::path data, ckpt;

  std::vector<std::string> train_args(const fs::path& out, const fs::path& metrics) const {
    return {"--word_dim", "16",    "--hidden_dim", "16",  "--decoder_hidden", "16",    "--hop_size",
            "2",          "--dropout", "0",        "--init_scale", "0.2", "--batch_size",   "5",     "--lr",
            "0.01",       "--epochs", "400",       "--eval_every", "10",  "--stop_bleu",    "0.999", "--patience",
            "0",          "--max_decode_len", "30", "--beam_size", "3",   "train",          "--train", data.string(),
            "--dev",      data.string(), "-q",     "-o",           out.string(), "--metrics", metrics.string()};
  }

  void SetUp() override {
    Cli::SetUp();
    data = write_pairs("toy.jsonl", pairs);
    ckpt = dir / "model.ckpt";
    const RunResult r = run(train_args(ckpt, dir / "metrics.csv"));
    ASSERT_EQ(r.status, 0) << r.err;
  }
};

TEST_F(CliTrained, TrainingWritesArtifactsDeterministically) {
  const auto csv = lines(slurp(dir / "metrics.csv"));
  ASSERT_GE(csv.size(), 2u);
  EXPECT_EQ(csv[0], "epoch,train_loss,dev_bleu,grad_norm_mean");
  const auto echoed = nlohmann::json::parse(slurp(dir / "metrics.csv.config.json"));
  EXPECT_EQ(echoed["word_dim"], "16");
  // Same seed and data: identical checkpoint bytes.
  ASSERT_EQ(run(train_args(dir / "again.ckpt", dir / "again.csv")).status, 0);
  EXPECT_EQ(slurp(dir / "again.ckpt"), slurp(ckpt));
}

TEST_F(CliTrained, GreedyEqualsBeamOne) {
  std::string sql_file;
  for (const auto& p : pairs) sql_file += p.sql + "\n";
  const auto queries = write("q.sql", sql_file);
  const RunResult greedy = run({"generate", "-c", ckpt.string(), "--greedy", "-f", queries.string()});
  const RunResult beam1 = run({"generate", "-c", ckpt.string(), "--beam-size", "1", "-f", queries.string()});
  ASSERT_EQ(greedy.status, 0) << greedy.err;
  EXPECT_EQ(lines(greedy.out).size(), 5u);
  EXPECT_EQ(greedy.out, beam1.out);
  EXPECT_EQ(run({"generate", "-c", ckpt.string(), "--beam-size", "0", "SELECT a"}).status, 2);
  EXPECT_EQ(run({"generate", "-c", (dir / "missing.ckpt").string(), "SELECT a"}).status, 1);
}

TEST_F(CliTrained, EvaluateMemorizedSet) {
  const auto report_path = dir / "report.json";
  const RunResult r = run({"evaluate", "-c", ckpt.string(), "--test", data.string(), "--report", report_path.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(report_path));
  EXPECT_GE(report["corpus_bleu4"].get<double>(), 0.99);
  EXPECT_EQ(report["examples"].size(), 5u);
  EXPECT_TRUE(report.contains("config_hash"));
  EXPECT_TRUE(report.contains("tool_version"));
  // Stdout mode gives the same document.
  const RunResult again = run({"evaluate", "-c", ckpt.string(), "--test", data.string()});
  EXPECT_EQ(nlohmann::json::parse(again.out), report);
}

}  // namespace
}  // namespace sql2text
