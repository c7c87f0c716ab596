#pragma once

// Hand-rolled generators shared by the property tests.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sql2text/sql.hpp"

namespace sql2text::testing {

using Gen = std::mt19937_64;

inline std::size_t pick(Gen& g, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(g); }
inline bool coin(Gen& g, double p = 0.5) { return std::bernoulli_distribution(p)(g); }

inline const std::vector<std::string>& column_pool() {
  static const std::vector<std::string> pool = {"company", "assets",   "sales",      "industry", "profits",
                                                "player",  "position", "touchdowns", "starter",  "name",
                                                "year",    "team",     "first name", "home town"};
  return pool;
}

inline std::string random_column(Gen& g) { return column_pool()[pick(g, column_pool().size())]; }

/// Placeholders, integers, decimals and quoted strings.
inline ValueToken random_value(Gen& g) {
  switch (pick(g, 4)) {
    case 0: return ValueToken::placeholder(pick(g, 4));
    case 1: return ValueToken::literal(std::to_string(static_cast<long>(pick(g, 2000)) - 1000));
    case 2: return ValueToken::literal(std::to_string(pick(g, 100)) + "." + std::to_string(1 + pick(g, 9)));
    default: {
      static const std::vector<std::string> words = {"texas", "new york", "o'neil", "qb", "x\"y", "2 seasons"};
      return ValueToken::literal(words[pick(g, words.size())]);
    }
  }
}

inline Condition random_condition(Gen& g) {
  static const Comparator cmps[] = {Comparator::eq, Comparator::ne, Comparator::lt,
                                    Comparator::gt, Comparator::le, Comparator::ge};
  return Condition{random_column(g), cmps[pick(g, 6)], random_value(g)};
}

/// Expression obeying the AST invariants: AND/OR never nest their own kind
/// and have at least two children, NOT has one.
inline LogicExpr random_expr(Gen& g, int depth, std::optional<LogicOp> parent = std::nullopt) {
  if (depth <= 0 || coin(g, 0.4)) return LogicExpr::leaf(random_condition(g));
  std::vector<LogicOp> ops;
  for (LogicOp op : {LogicOp::and_, LogicOp::or_, LogicOp::not_}) {
    if (op != LogicOp::not_ && parent == op) continue;
    ops.push_back(op);
  }
  const LogicOp op = ops[pick(g, ops.size())];
  if (op == LogicOp::not_) return LogicExpr::make(op, {random_expr(g, depth - 1, op)});
  std::vector<LogicExpr> children;
  const std::size_t n = 2 + pick(g, 3);
  for (std::size_t i = 0; i < n; ++i) children.push_back(random_expr(g, depth - 1, op));
  return LogicExpr::make(op, std::move(children));
}

inline SqlQuery random_query(Gen& g, int max_depth = 3) {
  static const Aggregation aggs[] = {Aggregation::count, Aggregation::max, Aggregation::min, Aggregation::sum,
                                     Aggregation::avg};
  SqlQuery q;
  if (coin(g, 0.4)) q.aggregation = aggs[pick(g, 5)];
  const std::size_t ncols = 1 + pick(g, 3);
  for (std::size_t i = 0; i < ncols; ++i) q.select_columns.push_back(random_column(g));
  if (coin(g, 0.85)) q.where = random_expr(g, max_depth);
  return q;
}

/// Flat WikiSQL-shaped query: optional aggregation, one column, up to three
/// AND-ed conditions on placeholder values.
inline SqlQuery random_flat_query(Gen& g) {
  static const Aggregation aggs[] = {Aggregation::count, Aggregation::max, Aggregation::min};
  static const Comparator cmps[] = {Comparator::eq, Comparator::gt, Comparator::lt};
  SqlQuery q;
  if (coin(g, 0.3)) q.aggregation = aggs[pick(g, 3)];
  q.select_columns.push_back(random_column(g));
  const std::size_t n = pick(g, 4);
  std::vector<LogicExpr> leaves;
  for (std::size_t i = 0; i < n; ++i) {
    leaves.push_back(LogicExpr::leaf(Condition{random_column(g), cmps[pick(g, 3)], ValueToken::placeholder(i)}));
  }
  if (n == 1) q.where = leaves.front();
  if (n > 1) q.where = LogicExpr::make(LogicOp::and_, std::move(leaves));
  return q;
}

inline std::vector<std::string> random_tokens(Gen& g, std::size_t vocab, std::size_t max_len) {
  std::vector<std::string> out(pick(g, max_len + 1));
  for (auto& t : out) t = "w" + std::to_string(pick(g, vocab));
  return out;
}

}  // namespace sql2text::testing
