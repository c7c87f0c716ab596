#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sql2text {

enum class Aggregation { count, max, min, sum, avg };
enum class Comparator { eq, ne, lt, gt, le, ge };
enum class LogicOp { and_, or_, not_ };

/// Upper-case SQL keyword, e.g. "COUNT".
std::string_view aggregation_keyword(Aggregation agg);
/// Canonical operator token, one of = != < > <= >=.
std::string_view comparator_token(Comparator cmp);
std::string_view logic_keyword(LogicOp op);

struct ValueToken {
  enum class Kind { placeholder, literal };
  Kind kind = Kind::literal;
  // Placeholders are normalized to "val_<k>". Literals keep their text
  // without surrounding quotes.
  std::string text;

  static ValueToken placeholder(std::size_t index);
  static ValueToken literal(std::string text);

  bool operator==(const ValueToken&) const = default;
};

struct Condition {
  std::string column;
  Comparator comparator = Comparator::eq;
  ValueToken value;

  bool operator==(const Condition&) const = default;
};

/// Boolean combination of conditions. AND/OR hold at least two children and
/// never directly contain an operator of their own kind; NOT holds one.
struct LogicExpr {
  std::optional<LogicOp> op;  // empty for a leaf condition
  std::optional<Condition> condition;
  std::vector<LogicExpr> children;

  static LogicExpr leaf(Condition c);
  static LogicExpr make(LogicOp op, std::vector<LogicExpr> children);

  bool is_leaf() const { return !op.has_value(); }
  bool operator==(const LogicExpr&) const = default;
};

struct SqlQuery {
  std::optional<Aggregation> aggregation;
  std::vector<std::string> select_columns;
  std::optional<LogicExpr> where;

  bool operator==(const SqlQuery&) const = default;
};

/// Conditions of an expression in left-to-right order.
std::vector<const Condition*> conditions_of(const LogicExpr& expr);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t offset, std::vector<std::string> expected);

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Raised for recognizable SQL outside the dialect (JOIN, ORDER BY, ...).
class UnsupportedSyntax : public ParseError {
 public:
  using ParseError::ParseError;
};

struct ParseOptions {
  // Replace every distinct value (literal or existing placeholder) with
  // val_0, val_1, ... in order of first occurrence.
  bool anonymize = false;
};

/// Parses `SELECT [AGG] col[, col...] [FROM table] [WHERE expr] [;]`.
/// Keywords are case-insensitive; multi-word columns use double quotes.
SqlQuery parse(std::string_view sql, const ParseOptions& options = {});

/// Canonical text such that parse(render(q)) == q.
std::string render(const SqlQuery& query);

/// {"aggregation": "COUNT"|null, "select": [...], "where": expr|null,
///  "conditions": n}. Leaves are {"column", "op", "value", "placeholder"},
/// operators {"op", "children"}.
nlohmann::ordered_json to_json(const SqlQuery& query);

}  // namespace sql2text
