#include "sql2text/query_forms.hpp"

#include "sql2text/query_graph.hpp"

namespace sql2text {
namespace {

void append(std::vector<std::string>& out, const std::vector<std::string>& toks) {
  out.insert(out.end(), toks.begin(), toks.end());
}

std::vector<std::string> condition_tokens(const Condition& c) {
  std::vector<std::string> out = lowercase_tokens(c.column);
  out.emplace_back(comparator_token(c.comparator));
  append(out, lowercase_tokens(c.value.text));
  return out;
}

void linearize_expr(const LogicExpr& e, std::vector<std::string>& out, bool nested) {
  if (e.is_leaf()) {
    append(out, condition_tokens(*e.condition));
    return;
  }
  if (*e.op == LogicOp::not_) {
    out.emplace_back("not");
    out.emplace_back("(");
    linearize_expr(e.children.front(), out, false);
    out.emplace_back(")");
    return;
  }
  if (nested) out.emplace_back("(");
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    if (i != 0) out.emplace_back(*e.op == LogicOp::and_ ? kSplitSymbol : "or");
    linearize_expr(e.children[i], out, true);
  }
  if (nested) out.emplace_back(")");
}

std::string joined_lower(const std::string& text) {
  std::string out;
  for (const auto& tok : lowercase_tokens(text)) out += (out.empty() ? "" : " ") + tok;
  return out;
}

std::string condition_label(const Condition& c) {
  return joined_lower(c.column) + " " + std::string(comparator_token(c.comparator)) + " " + joined_lower(c.value.text);
}

TreeNode tree_of(const LogicExpr& e) {
  if (e.is_leaf()) return TreeNode{condition_label(*e.condition), {}};
  TreeNode node{std::string(logic_keyword(*e.op)), {}};
  for (const auto& child : e.children) node.children.push_back(tree_of(child));
  return node;
}

std::string comparator_phrase(Comparator cmp) {
  switch (cmp) {
    case Comparator::gt: return "more than";
    case Comparator::lt: return "less than";
    case Comparator::ge: return "more than or equal to";
    case Comparator::le: return "less than or equal to";
    case Comparator::eq: return "equals";
    case Comparator::ne: return "not equals";
  }
  return "";
}

std::string template_expr(const LogicExpr& e) {
  if (e.is_leaf()) {
    const Condition& c = *e.condition;
    return joined_lower(c.column) + " " + comparator_phrase(c.comparator) + " " + joined_lower(c.value.text);
  }
  if (*e.op == LogicOp::not_) return "not " + template_expr(e.children.front());
  const std::string sep = *e.op == LogicOp::and_ ? " and " : " or ";
  std::string out;
  for (std::size_t i = 0; i < e.children.size(); ++i) out += (i ? sep : "") + template_expr(e.children[i]);
  return out;
}

}  // namespace

std::vector<std::string> linearize(const SqlQuery& query) {
  std::vector<std::string> out{"select"};
  if (query.aggregation) out.push_back(joined_lower(std::string(aggregation_keyword(*query.aggregation))));
  out.emplace_back(kSplitSymbol);
  for (std::size_t i = 0; i < query.select_columns.size(); ++i) {
    if (i != 0) out.emplace_back(kSplitSymbol);
    append(out, lowercase_tokens(query.select_columns[i]));
  }
  if (query.where) {
    out.emplace_back("where");
    linearize_expr(*query.where, out, false);
  }
  return out;
}

TreeNode tree_repr(const SqlQuery& query) {
  TreeNode root{"Query", {}};
  TreeNode select_list{"Select List", {}};
  std::vector<TreeNode> columns;
  for (const auto& col : query.select_columns) columns.push_back(TreeNode{joined_lower(col), {}});
  if (query.aggregation) {
    select_list.children.push_back(TreeNode{std::string(aggregation_keyword(*query.aggregation)), std::move(columns)});
  } else {
    select_list.children = std::move(columns);
  }
  root.children.push_back(std::move(select_list));
  if (query.where) root.children.push_back(TreeNode{"Where Clause", {tree_of(*query.where)}});
  return root;
}

std::string to_sexpr(const TreeNode& tree) {
  if (tree.children.empty()) return "(" + tree.label + ")";
  std::string out = "(" + tree.label;
  for (const auto& child : tree.children) out += " " + to_sexpr(child);
  return out + ")";
}

std::string template_interpret(const SqlQuery& query) {
  std::string out;
  if (query.aggregation) {
    switch (*query.aggregation) {
      case Aggregation::count: out = "how many"; break;
      case Aggregation::max: out = "which maximum"; break;
      case Aggregation::min: out = "which minimum"; break;
      case Aggregation::sum: out = "which total"; break;
      case Aggregation::avg: out = "which average"; break;
    }
  } else {
    out = "which";
  }
  for (std::size_t i = 0; i < query.select_columns.size(); ++i) {
    out += (i ? " and " : " ") + joined_lower(query.select_columns[i]);
  }
  if (query.where) out += " where " + template_expr(*query.where);
  return out;
}

}  // namespace sql2text
