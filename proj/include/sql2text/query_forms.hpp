#pragma once

#include <string>
#include <vector>

#include "sql2text/sql.hpp"

namespace sql2text {

inline constexpr const char* kSplitSymbol = "<sep>";

/// Sequence encoding for sequence-to-sequence baselines:
///   select [agg] <sep> columns where cond <sep> cond <sep> ...
/// Selected columns are separated by <sep>. Conjunctions use <sep>; OR and
/// NOT groups are spelled with "or"/"not" and parentheses.
std::vector<std::string> linearize(const SqlQuery& query);

/// Tree encoding for tree-to-sequence baselines: a root with "Select List"
/// (columns) and, when present, "Where Clause" (operators over conditions).
struct TreeNode {
  std::string label;
  std::vector<TreeNode> children;

  bool operator==(const TreeNode&) const = default;
};

TreeNode tree_repr(const SqlQuery& query);
/// Bracketed one-line form, e.g. (Query (Select List company) ...).
std::string to_sexpr(const TreeNode& tree);

/// Rule-based English rendering used as the template baseline.
std::string template_interpret(const SqlQuery& query);

}  // namespace sql2text
