#include "sql2text/dataset.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "sql2text/query_graph.hpp"

namespace sql2text {

ExamplePair make_pair(const std::string& sql, const std::string& text, const ParseOptions& options) {
  ExamplePair pair;
  pair.sql = sql;
  pair.query = parse(sql, options);
  pair.target = lowercase_tokens(text);
  return pair;
}

IngestResult ingest_lines(const std::vector<std::string>& lines, const ParseOptions& options,
                          const std::string& source_name) {
  IngestResult result;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::string sql, text;
    try {
      const auto j = nlohmann::json::parse(line);
      sql = j.at("sql").get<std::string>();
      text = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(source_name + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
    }
    try {
      ExamplePair pair = make_pair(sql, text, options);
      if (pair.target.empty()) {
        ++result.skipped;
        result.warnings.push_back(source_name + ":" + std::to_string(lineno) + ": empty interpretation");
        continue;
      }
      result.pairs.push_back(std::move(pair));
    } catch (const ParseError& e) {
      ++result.skipped;
      result.warnings.push_back(source_name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return result;
}

IngestResult ingest_dataset(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return ingest_lines(lines, options, path);
}

std::vector<std::string> source_tokens(const SqlQuery& query) {
  std::vector<std::string> out;
  for (const auto& node : build_graph(query).nodes) out.insert(out.end(), node.text.begin(), node.text.end());
  return out;
}

Vocabularies build_vocab(const std::vector<ExamplePair>& pairs, std::size_t min_freq) {
  std::map<std::string, std::size_t> source_counts, target_counts;
  source_counts[std::string(kSuperToken)] += 0;
  for (const auto& p : pairs) {
    for (const auto& t : source_tokens(p.query)) ++source_counts[t];
    for (const auto& t : p.target) ++target_counts[t];
  }
  auto keep_source = [](const std::string& t) { return is_placeholder_token(t) || t == kSuperToken; };
  auto keep_target = [](const std::string& t) { return is_placeholder_token(t); };
  return {Vocabulary::build(source_counts, min_freq, keep_source),
          Vocabulary::build(target_counts, min_freq, keep_target)};
}

}  // namespace sql2text
