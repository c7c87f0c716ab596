#include "sql2text/query_graph.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sql2text {

std::string_view node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::select: return "select";
    case NodeKind::aggregation: return "aggregation";
    case NodeKind::column: return "column";
    case NodeKind::constraint: return "constraint";
    case NodeKind::op: return "operator";
    case NodeKind::super: return "super";
  }
  return "";
}

NodeKind node_kind_from_name(std::string_view name) {
  for (NodeKind k : {NodeKind::select, NodeKind::aggregation, NodeKind::column, NodeKind::constraint, NodeKind::op,
                     NodeKind::super}) {
    if (node_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown node kind '" + std::string(name) + "'");
}

std::vector<std::string> lowercase_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t QueryGraph::add_node(NodeKind kind, std::vector<std::string> text) {
  if (text.empty()) throw std::invalid_argument("graph node text must not be empty");
  nodes.push_back(GraphNode{nodes.size(), kind, std::move(text)});
  return nodes.size() - 1;
}

void QueryGraph::add_edge(std::size_t from, std::size_t to) {
  if (from >= nodes.size() || to >= nodes.size()) throw std::out_of_range("edge endpoint out of range");
  if (from == to) throw std::invalid_argument("self-loops are not allowed");
  if (!has_edge(from, to)) edges.emplace_back(from, to);
}

bool QueryGraph::has_edge(std::size_t from, std::size_t to) const {
  return std::find(edges.begin(), edges.end(), Edge{from, to}) != edges.end();
}

bool QueryGraph::has_super_node() const {
  return std::any_of(nodes.begin(), nodes.end(), [](const GraphNode& n) { return n.kind == NodeKind::super; });
}

Adjacency Adjacency::from_graph(const QueryGraph& graph) {
  Adjacency adj;
  adj.forward.resize(graph.nodes.size());
  adj.backward.resize(graph.nodes.size());
  for (const auto& [from, to] : graph.edges) {
    adj.forward[from].push_back(to);
    adj.backward[to].push_back(from);
  }
  return adj;
}

namespace {

std::string lower_word(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> column_tokens(const std::string& column) {
  auto toks = lowercase_tokens(column);
  if (toks.empty()) throw std::invalid_argument("column name must not be empty");
  return toks;
}

std::vector<std::string> constraint_tokens(const Condition& c) {
  std::vector<std::string> toks{std::string(comparator_token(c.comparator))};
  auto value = lowercase_tokens(c.value.text);
  if (value.empty()) value.push_back("''");
  toks.insert(toks.end(), value.begin(), value.end());
  return toks;
}

class GraphBuilder {
 public:
  QueryGraph build(const SqlQuery& query) {
    select_ = graph_.add_node(NodeKind::select, {"select"});
    std::size_t column_parent = select_;
    if (query.aggregation) {
      column_parent = graph_.add_node(NodeKind::aggregation, {lower_word(aggregation_keyword(*query.aggregation))});
      graph_.add_edge(select_, column_parent);
    }
    std::map<std::vector<std::string>, std::size_t> selected;
    for (const auto& col : query.select_columns) {
      auto toks = column_tokens(col);
      auto it = selected.find(toks);
      if (it == selected.end()) it = selected.emplace(toks, graph_.add_node(NodeKind::column, toks)).first;
      graph_.add_edge(column_parent, it->second);
    }
    if (query.where) {
      const std::size_t top = visit(*query.where);
      // Operators hang off select via their own edge; a bare condition column
      // attaches under select.
      if (query.where->is_leaf()) graph_.add_edge(select_, top);
      attach_constraints();
    }
    return std::move(graph_);
  }

 private:
  // Returns the node standing for `e`: the condition column or the operator.
  std::size_t visit(const LogicExpr& e) {
    if (e.is_leaf()) {
      const std::size_t col = graph_.add_node(NodeKind::column, column_tokens(e.condition->column));
      pending_.emplace_back(col, constraint_tokens(*e.condition));
      return col;
    }
    const std::size_t op = graph_.add_node(NodeKind::op, {lower_word(logic_keyword(*e.op))});
    graph_.add_edge(op, select_);
    for (const auto& child : e.children) graph_.add_edge(op, visit(child));
    return op;
  }

  void attach_constraints() {
    std::map<std::vector<std::string>, std::size_t> merged;
    for (auto& [col, toks] : pending_) {
      auto it = merged.find(toks);
      if (it == merged.end()) it = merged.emplace(toks, graph_.add_node(NodeKind::constraint, toks)).first;
      graph_.add_edge(col, it->second);
    }
  }

  QueryGraph graph_;
  std::size_t select_ = 0;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> pending_;
};

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

QueryGraph build_graph(const SqlQuery& query) {
  if (query.select_columns.empty()) throw std::invalid_argument("query has no selected columns");
  return GraphBuilder().build(query);
}

QueryGraph to_undirected(const QueryGraph& graph) {
  QueryGraph out = graph;
  for (const auto& [from, to] : graph.edges) out.add_edge(to, from);
  out.undirected_view = true;
  return out;
}

QueryGraph with_super_node(const QueryGraph& graph) {
  if (graph.has_super_node()) throw std::invalid_argument("graph already contains a super node");
  QueryGraph out = graph;
  const std::size_t super = out.add_node(NodeKind::super, {std::string(kSuperToken)});
  for (std::size_t v = 0; v < super; ++v) {
    out.add_edge(v, super);
    if (out.undirected_view) out.add_edge(super, v);
  }
  return out;
}

std::string to_dot(const QueryGraph& graph) {
  std::ostringstream os;
  os << (graph.undirected_view ? "graph" : "digraph") << " query {\n";
  for (const auto& n : graph.nodes) {
    std::string label;
    for (std::size_t i = 0; i < n.text.size(); ++i) label += (i ? " " : "") + n.text[i];
    os << "  n" << n.id << " [label=\"" << dot_escape(label) << "\", kind=\"" << node_kind_name(n.kind) << "\"];\n";
  }
  const char* arrow = graph.undirected_view ? " -- " : " -> ";
  for (const auto& [from, to] : graph.edges) {
    // An undirected DOT graph lists each mirrored pair once.
    if (graph.undirected_view && from > to && graph.has_edge(to, from)) continue;
    os << "  n" << from << arrow << "n" << to << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_json(const QueryGraph& graph, int indent) {
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : graph.nodes) {
    nlohmann::ordered_json node;
    node["id"] = n.id;
    node["kind"] = node_kind_name(n.kind);
    node["text"] = n.text;
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& [from, to] : graph.edges) j["edges"].push_back({from, to});
  j["undirected"] = graph.undirected_view;
  return j.dump(indent);
}

}  // namespace sql2text
