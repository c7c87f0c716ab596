#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sql2text/sql.hpp"

namespace sql2text {

enum class NodeKind { select, aggregation, column, constraint, op, super };

std::string_view node_kind_name(NodeKind kind);
NodeKind node_kind_from_name(std::string_view name);

struct GraphNode {
  std::size_t id = 0;
  NodeKind kind = NodeKind::column;
  std::vector<std::string> text;  // lowercase tokens, never empty

  bool operator==(const GraphNode&) const = default;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Directed, node-labelled graph of one query.
///
/// Edge convention ("X connects with Y" read as X -> Y):
///   select -> selected column       (or select -> aggregation -> column)
///   operator -> select
///   operator -> condition column    (operator -> nested operator for nesting)
///   condition column -> constraint  (constraints with equal text are shared)
/// A lone condition without an operator hangs its column directly off select.
struct QueryGraph {
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  bool undirected_view = false;

  std::size_t add_node(NodeKind kind, std::vector<std::string> text);
  void add_edge(std::size_t from, std::size_t to);
  bool has_edge(std::size_t from, std::size_t to) const;
  bool has_super_node() const;

  bool operator==(const QueryGraph&) const = default;
};

/// Forward (v directs to) and backward (directs to v) neighbor lists.
struct Adjacency {
  std::vector<std::vector<std::size_t>> forward;
  std::vector<std::vector<std::size_t>> backward;

  static Adjacency from_graph(const QueryGraph& graph);
};

/// Splits free text into lowercase whitespace-separated tokens.
std::vector<std::string> lowercase_tokens(std::string_view text);

QueryGraph build_graph(const SqlQuery& query);

/// Adds the reverse of every edge (deduplicated) and marks the view.
QueryGraph to_undirected(const QueryGraph& graph);

/// Appends a super node with text ["<super>"] and an edge from every other
/// node into it. Throws if the graph already has one.
QueryGraph with_super_node(const QueryGraph& graph);

inline constexpr std::string_view kSuperToken = "<super>";

std::string to_dot(const QueryGraph& graph);
/// {"nodes":[{"id","kind","text"[]}],"edges":[[src,dst]],"undirected":bool}
std::string to_json(const QueryGraph& graph, int indent = -1);

}  // namespace sql2text
