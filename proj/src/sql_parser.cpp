#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <sstream>

#include "sql2text/sql.hpp"

namespace sql2text {

std::string_view aggregation_keyword(Aggregation agg) {
  switch (agg) {
    case Aggregation::count: return "COUNT";
    case Aggregation::max: return "MAX";
    case Aggregation::min: return "MIN";
    case Aggregation::sum: return "SUM";
    case Aggregation::avg: return "AVG";
  }
  return "";
}

std::string_view comparator_token(Comparator cmp) {
  switch (cmp) {
    case Comparator::eq: return "=";
    case Comparator::ne: return "!=";
    case Comparator::lt: return "<";
    case Comparator::gt: return ">";
    case Comparator::le: return "<=";
    case Comparator::ge: return ">=";
  }
  return "";
}

std::string_view logic_keyword(LogicOp op) {
  switch (op) {
    case LogicOp::and_: return "AND";
    case LogicOp::or_: return "OR";
    case LogicOp::not_: return "NOT";
  }
  return "";
}

ValueToken ValueToken::placeholder(std::size_t index) {
  return ValueToken{Kind::placeholder, "val_" + std::to_string(index)};
}

ValueToken ValueToken::literal(std::string text) { return ValueToken{Kind::literal, std::move(text)}; }

LogicExpr LogicExpr::leaf(Condition c) {
  LogicExpr e;
  e.condition = std::move(c);
  return e;
}

LogicExpr LogicExpr::make(LogicOp op, std::vector<LogicExpr> children) {
  if (op == LogicOp::not_) {
    if (children.size() != 1) throw std::invalid_argument("NOT takes exactly one operand");
  } else if (children.size() < 2) {
    throw std::invalid_argument("AND/OR take at least two operands");
  }
  LogicExpr e;
  e.op = op;
  for (auto& child : children) {
    if (op != LogicOp::not_ && child.op == op) {
      for (auto& grandchild : child.children) e.children.push_back(std::move(grandchild));
    } else {
      e.children.push_back(std::move(child));
    }
  }
  return e;
}

namespace {

void collect_conditions(const LogicExpr& e, std::vector<const Condition*>& out) {
  if (e.is_leaf()) {
    out.push_back(&*e.condition);
    return;
  }
  for (const auto& c : e.children) collect_conditions(c, out);
}

}  // namespace

std::vector<const Condition*> conditions_of(const LogicExpr& expr) {
  std::vector<const Condition*> out;
  collect_conditions(expr, out);
  return out;
}

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i != 0) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t offset, std::vector<std::string> expected)
    : std::runtime_error([&] {
        std::string full = "parse error at byte " + std::to_string(offset) + ": " + message;
        if (!expected.empty()) full += " (expected " + join(expected, ", ") + ")";
        return full;
      }()),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

enum class TokKind { ident, quoted_ident, string, number, comparator, comma, lparen, rparen, semicolon, end };

struct Token {
  TokKind kind;
  std::string text;  // identifier/literal content, comparator spelling
  std::size_t offset;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_ident_start(c)) {
      while (i < src.size() && is_ident_char(src[i])) ++i;
      out.push_back({TokKind::ident, std::string(src.substr(start, i - start)), start});
    } else if (is_digit(c) || (c == '-' && i + 1 < src.size() && is_digit(src[i + 1])) ||
               (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      ++i;
      while (i < src.size() && (is_digit(src[i]) || src[i] == '.')) ++i;
      out.push_back({TokKind::number, std::string(src.substr(start, i - start)), start});
    } else if (c == '"' || c == '\'' || c == '`') {
      // Quotes are escaped by doubling.
      std::string text;
      ++i;
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == c) {
          if (i + 1 < src.size() && src[i + 1] == c) {
            text += c;
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        text += src[i++];
      }
      if (!closed) throw ParseError("unterminated quoted text", start, {std::string(1, c)});
      out.push_back({c == '\'' ? TokKind::string : TokKind::quoted_ident, std::move(text), start});
    } else if (c == '=' || c == '<' || c == '>' || c == '!') {
      std::string op(1, c);
      if (i + 1 < src.size()) {
        const char n = src[i + 1];
        if ((c == '<' && (n == '=' || n == '>')) || (c == '>' && n == '=') || (c == '!' && n == '=')) op += n;
      }
      if (op == "!") throw ParseError("unexpected character '!'", start, {"!="});
      i += op.size();
      out.push_back({TokKind::comparator, op, start});
    } else if (c == ',') {
      out.push_back({TokKind::comma, ",", start});
      ++i;
    } else if (c == '(') {
      out.push_back({TokKind::lparen, "(", start});
      ++i;
    } else if (c == ')') {
      out.push_back({TokKind::rparen, ")", start});
      ++i;
    } else if (c == ';') {
      out.push_back({TokKind::semicolon, ";", start});
      ++i;
    } else {
      std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "\\x" + [&] {
        std::ostringstream hex;
        hex << std::hex << static_cast<int>(static_cast<unsigned char>(c));
        return hex.str();
      }();
      throw ParseError("unexpected character '" + shown + "'", start, {});
    }
  }
  out.push_back({TokKind::end, "", src.size()});
  return out;
}

const std::array<std::string_view, 7> kDialectKeywords = {"SELECT", "WHERE", "AND", "OR", "NOT", "FROM", "AS"};

const std::array<std::string_view, 26> kUnsupportedKeywords = {
    "JOIN",   "INNER",  "LEFT",   "RIGHT",  "OUTER",     "FULL",   "CROSS",  "NATURAL", "ON",
    "ORDER",  "GROUP",  "BY",     "HAVING", "LIMIT",     "OFFSET", "UNION",  "EXCEPT",  "INTERSECT",
    "DISTINCT", "IN",   "LIKE",   "BETWEEN", "IS",       "EXISTS", "INSERT", "UPDATE"};

bool is_dialect_keyword(const std::string& up) {
  return std::find(kDialectKeywords.begin(), kDialectKeywords.end(), up) != kDialectKeywords.end();
}

bool is_unsupported_keyword(const std::string& up) {
  return std::find(kUnsupportedKeywords.begin(), kUnsupportedKeywords.end(), up) != kUnsupportedKeywords.end();
}

std::optional<Aggregation> aggregation_from(const std::string& up) {
  if (up == "COUNT") return Aggregation::count;
  if (up == "MAX") return Aggregation::max;
  if (up == "MIN") return Aggregation::min;
  if (up == "SUM") return Aggregation::sum;
  if (up == "AVG") return Aggregation::avg;
  return std::nullopt;
}

std::optional<Comparator> comparator_from(const std::string& op) {
  if (op == "=") return Comparator::eq;
  if (op == "!=" || op == "<>") return Comparator::ne;
  if (op == "<") return Comparator::lt;
  if (op == ">") return Comparator::gt;
  if (op == "<=") return Comparator::le;
  if (op == ">=") return Comparator::ge;
  return std::nullopt;
}

// "val0", "val_3", "VAL_12" -> index
std::optional<std::size_t> placeholder_index(const std::string& ident) {
  const std::string lo = lower(ident);
  if (lo.size() < 4 || lo.compare(0, 3, "val") != 0) return std::nullopt;
  std::size_t pos = 3;
  if (lo[pos] == '_') ++pos;
  if (pos >= lo.size()) return std::nullopt;
  for (std::size_t i = pos; i < lo.size(); ++i) {
    if (!is_digit(lo[i])) return std::nullopt;
  }
  if (lo.size() - pos > 9) return std::nullopt;
  return static_cast<std::size_t>(std::stoul(lo.substr(pos)));
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(lex(src)) {}

  SqlQuery parse_query() {
    SqlQuery q;
    expect_keyword("SELECT");
    parse_select_list(q);
    if (peek_keyword("FROM")) {
      advance();
      if (peek().kind != TokKind::ident && peek().kind != TokKind::quoted_ident) fail("missing table name", {"table name"});
      check_identifier_allowed(peek());
      advance();
    }
    if (peek_keyword("WHERE")) {
      advance();
      q.where = parse_or();
    }
    if (peek().kind == TokKind::semicolon) advance();
    if (peek().kind != TokKind::end) {
      reject_unsupported(peek());
      fail("unexpected " + describe(peek()), q.where ? std::vector<std::string>{"AND", "OR", "end of input"}
                                                     : std::vector<std::string>{",", "FROM", "WHERE", "end of input"});
    }
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  const Token& advance() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  bool peek_keyword(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokKind::ident && upper(peek(ahead).text) == kw;
  }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    throw ParseError(msg, peek().offset, std::move(expected));
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokKind::end: return "end of input";
      case TokKind::string: return "string '" + t.text + "'";
      case TokKind::quoted_ident: return "quoted name \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  void reject_unsupported(const Token& t) const {
    if (t.kind == TokKind::ident && is_unsupported_keyword(upper(t.text))) {
      throw UnsupportedSyntax("unsupported syntax: " + upper(t.text) + " is outside the supported dialect", t.offset,
                              {});
    }
  }

  void check_identifier_allowed(const Token& t) const {
    if (t.kind != TokKind::ident) return;
    reject_unsupported(t);
    const std::string up = upper(t.text);
    if (is_dialect_keyword(up)) {
      throw ParseError("keyword " + up + " cannot be used as a name (quote it)", t.offset, {"column name"});
    }
  }

  void expect_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) {
      reject_unsupported(peek());
      if (peek().kind == TokKind::ident) {
        fail("unknown keyword '" + peek().text + "'", {std::string(kw)});
      }
      fail("unexpected " + describe(peek()), {std::string(kw)});
    }
    advance();
  }

  bool at_column_start() const {
    const Token& t = peek();
    if (t.kind == TokKind::quoted_ident) return true;
    if (t.kind != TokKind::ident) return false;
    return !is_dialect_keyword(upper(t.text));
  }

  std::string parse_column() {
    const Token& t = peek();
    if (t.kind == TokKind::quoted_ident) {
      std::string name = t.text;
      const auto first = name.find_first_not_of(" \t\r\n");
      if (first == std::string::npos) fail("column name is empty", {"column name"});
      const auto last = name.find_last_not_of(" \t\r\n");
      advance();
      return name.substr(first, last - first + 1);
    }
    if (t.kind == TokKind::ident) {
      check_identifier_allowed(t);
      advance();
      return t.text;
    }
    reject_unsupported(t);
    fail(t.kind == TokKind::end ? "empty select list" : "unexpected " + describe(t), {"column name"});
  }

  void parse_select_list(SqlQuery& q) {
    if (peek().kind == TokKind::ident) {
      if (auto agg = aggregation_from(upper(peek().text))) {
        const TokKind next = peek(1).kind;
        const bool next_is_column =
            next == TokKind::quoted_ident || next == TokKind::lparen ||
            (next == TokKind::ident && !is_dialect_keyword(upper(peek(1).text)));
        if (next_is_column) {
          q.aggregation = agg;
          advance();
          if (peek().kind == TokKind::lparen) {
            advance();
            parse_columns(q);
            if (peek().kind != TokKind::rparen) fail("unbalanced parentheses", {")"});
            advance();
            return;
          }
        }
      }
    }
    if (peek_keyword("WHERE") || peek_keyword("FROM") || peek().kind == TokKind::end) {
      fail("empty select list", {"column name"});
    }
    parse_columns(q);
  }

  void parse_columns(SqlQuery& q) {
    if (!at_column_start() && peek().kind != TokKind::ident) {
      reject_unsupported(peek());
      fail(peek().kind == TokKind::end ? "empty select list" : "unexpected " + describe(peek()), {"column name"});
    }
    q.select_columns.push_back(parse_column());
    while (peek().kind == TokKind::comma) {
      advance();
      q.select_columns.push_back(parse_column());
    }
  }

  LogicExpr parse_or() {
    std::vector<LogicExpr> parts;
    parts.push_back(parse_and());
    while (peek_keyword("OR")) {
      advance();
      parts.push_back(parse_and());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return LogicExpr::make(LogicOp::or_, std::move(parts));
  }

  LogicExpr parse_and() {
    std::vector<LogicExpr> parts;
    parts.push_back(parse_not());
    while (peek_keyword("AND")) {
      advance();
      parts.push_back(parse_not());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return LogicExpr::make(LogicOp::and_, std::move(parts));
  }

  LogicExpr parse_not() {
    if (peek_keyword("NOT")) {
      advance();
      std::vector<LogicExpr> child;
      child.push_back(parse_not());
      return LogicExpr::make(LogicOp::not_, std::move(child));
    }
    if (peek().kind == TokKind::lparen) {
      advance();
      LogicExpr inner = parse_or();
      if (peek().kind != TokKind::rparen) {
        reject_unsupported(peek());
        fail("unbalanced parentheses", {")", "AND", "OR"});
      }
      advance();
      return inner;
    }
    return LogicExpr::leaf(parse_condition());
  }

  Condition parse_condition() {
    Condition c;
    if (!at_column_start()) {
      reject_unsupported(peek());
      fail(peek().kind == TokKind::end ? "missing condition" : "unexpected " + describe(peek()),
           {"column name", "NOT", "("});
    }
    c.column = parse_column();
    const Token& op = peek();
    if (op.kind != TokKind::comparator) {
      reject_unsupported(op);
      fail("expected a comparator after column '" + c.column + "'", {"=", "!=", "<>", "<", ">", "<=", ">="});
    }
    auto cmp = comparator_from(op.text);
    if (!cmp) fail("unknown comparator '" + op.text + "'", {"=", "!=", "<>", "<", ">", "<=", ">="});
    c.comparator = *cmp;
    advance();
    c.value = parse_value();
    return c;
  }

  ValueToken parse_value() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::number:
      case TokKind::string:
      case TokKind::quoted_ident:
        advance();
        return ValueToken::literal(t.text);
      case TokKind::ident: {
        const std::string up = upper(t.text);
        if (is_dialect_keyword(up) || is_unsupported_keyword(up)) {
          reject_unsupported(t);
          fail("dangling comparator", {"value"});
        }
        advance();
        if (auto idx = placeholder_index(t.text)) return ValueToken::placeholder(*idx);
        return ValueToken::literal(t.text);
      }
      default:
        fail("dangling comparator", {"value"});
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void anonymize_values(LogicExpr& e, std::map<std::pair<int, std::string>, std::size_t>& seen) {
  if (e.is_leaf()) {
    ValueToken& v = e.condition->value;
    const auto key = std::make_pair(static_cast<int>(v.kind), v.text);
    auto it = seen.find(key);
    if (it == seen.end()) it = seen.emplace(key, seen.size()).first;
    v = ValueToken::placeholder(it->second);
    return;
  }
  for (auto& c : e.children) anonymize_values(c, seen);
}

bool is_bare_identifier(const std::string& s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  const std::string up = upper(s);
  return !is_dialect_keyword(up) && !is_unsupported_keyword(up) && !aggregation_from(up);
}

std::string quote(const std::string& s, char q) {
  std::string out(1, q);
  for (char c : s) {
    if (c == q) out += q;
    out += c;
  }
  return out + q;
}

std::string render_column(const std::string& col) { return is_bare_identifier(col) ? col : quote(col, '"'); }

std::string render_value(const ValueToken& v) {
  if (v.kind == ValueToken::Kind::placeholder) return v.text;
  if (!v.text.empty() && (is_digit(v.text[0]) || v.text[0] == '-' || v.text[0] == '.')) {
    try {
      const auto toks = lex(v.text);
      if (toks.size() == 2 && toks[0].kind == TokKind::number && toks[0].text == v.text) return v.text;
    } catch (const ParseError&) {
    }
  }
  return quote(v.text, '\'');
}

std::string render_expr(const LogicExpr& e) {
  if (e.is_leaf()) {
    const Condition& c = *e.condition;
    return render_column(c.column) + " " + std::string(comparator_token(c.comparator)) + " " + render_value(c.value);
  }
  if (*e.op == LogicOp::not_) return "NOT (" + render_expr(e.children.front()) + ")";
  std::string out;
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    if (i != 0) out += " " + std::string(logic_keyword(*e.op)) + " ";
    const LogicExpr& c = e.children[i];
    const bool wrap = !c.is_leaf() && *c.op != LogicOp::not_;
    out += wrap ? "(" + render_expr(c) + ")" : render_expr(c);
  }
  return out;
}

}  // namespace

SqlQuery parse(std::string_view sql, const ParseOptions& options) {
  SqlQuery q = Parser(sql).parse_query();
  if (options.anonymize && q.where) {
    std::map<std::pair<int, std::string>, std::size_t> seen;
    anonymize_values(*q.where, seen);
  }
  return q;
}

std::string render(const SqlQuery& query) {
  std::string out = "SELECT ";
  if (query.aggregation) out += std::string(aggregation_keyword(*query.aggregation)) + " ";
  for (std::size_t i = 0; i < query.select_columns.size(); ++i) {
    if (i != 0) out += ", ";
    out += render_column(query.select_columns[i]);
  }
  if (query.where) out += " WHERE " + render_expr(*query.where);
  return out;
}

namespace {

nlohmann::ordered_json expr_json(const LogicExpr& e) {
  nlohmann::ordered_json j;
  if (e.is_leaf()) {
    j["column"] = e.condition->column;
    j["op"] = comparator_token(e.condition->comparator);
    j["value"] = e.condition->value.text;
    j["placeholder"] = e.condition->value.kind == ValueToken::Kind::placeholder;
    return j;
  }
  j["op"] = logic_keyword(*e.op);
  j["children"] = nlohmann::ordered_json::array();
  for (const auto& c : e.children) j["children"].push_back(expr_json(c));
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const SqlQuery& query) {
  nlohmann::ordered_json j;
  j["aggregation"] = query.aggregation ? nlohmann::ordered_json(aggregation_keyword(*query.aggregation))
                                       : nlohmann::ordered_json(nullptr);
  j["select"] = query.select_columns;
  j["where"] = query.where ? expr_json(*query.where) : nlohmann::ordered_json(nullptr);
  j["conditions"] = query.where ? conditions_of(*query.where).size() : 0;
  return j;
}

}  // namespace sql2text
