#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sql2text/sql.hpp"
#include "sql2text/vocabulary.hpp"

namespace sql2text {

/// One SQL / interpretation pair.
struct ExamplePair {
  std::string sql;
  SqlQuery query;
  std::vector<std::string> target;  // lowercased whitespace tokens, non-empty

  std::size_t target_len() const { return target.size(); }
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestResult {
  std::vector<ExamplePair> pairs;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;  // one per skipped line, with line number
};

/// Reads JSON Lines records {"sql": ..., "text": ...}. Lines whose SQL does
/// not parse (or whose text is empty) are skipped and reported; a line that
/// is not a valid record aborts with its line number.
IngestResult ingest_dataset(const std::string& path, const ParseOptions& options = {});
IngestResult ingest_lines(const std::vector<std::string>& lines, const ParseOptions& options = {},
                          const std::string& source_name = "<memory>");

ExamplePair make_pair(const std::string& sql, const std::string& text, const ParseOptions& options = {});

/// Node-text tokens of the query's graph, in node order.
std::vector<std::string> source_tokens(const SqlQuery& query);

struct Vocabularies {
  Vocabulary source;  // node text tokens
  Vocabulary target;  // interpretation tokens
};

/// Placeholders val_k and the super-node token are always kept.
Vocabularies build_vocab(const std::vector<ExamplePair>& pairs, std::size_t min_freq);

}  // namespace sql2text
