#include "sqlfunc/parser.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

enum class Tok { Ident, QuotedIdent, Number, String, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;   // identifiers lowercased, quoted/literals preserved
  std::size_t pos = 0;
};

// Keywords that start statements we deliberately do not handle.
const std::set<std::string> kUnsupportedLead = {
    "create", "insert", "update", "delete", "drop",  "alter",
    "with",   "values", "pragma", "attach", "explain"};

// Tokens that can never begin an expression.
const std::set<std::string> kReserved = {
    "select", "from",  "where", "group",     "by",    "having", "order",
    "limit",  "union", "intersect", "except", "join", "inner",  "left",
    "right",  "full",  "cross", "outer",     "on",    "using",  "and",
    "or",     "in",    "like",  "between",   "is",    "as",     "asc",
    "desc",   "nulls", "first", "last",      "distinct"};

const std::set<std::string> kUnsupportedAnywhere = {
    "over", "window", "case", "cast", "natural", "offset", "using"};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (i_ >= s_.size()) break;
      const std::size_t start = i_;
      const char c = s_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i_;
        while (j < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_'))
          ++j;
        out.push_back({Tok::Ident, lower(s_.substr(i_, j - i_)), start});
        i_ = j;
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && i_ + 1 < s_.size() &&
                  std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
        std::size_t j = i_;
        while (j < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[j])) || s_[j] == '.'))
          ++j;
        if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
          if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
            ++k;
            while (k < s_.size() &&
                   std::isdigit(static_cast<unsigned char>(s_[k])))
              ++k;
            j = k;
          }
        }
        out.push_back({Tok::Number, s_.substr(i_, j - i_), start});
        i_ = j;
      } else if (c == '\'') {
        std::string v;
        ++i_;
        while (true) {
          if (i_ >= s_.size())
            throw SyntaxError(start, "closing quote for string literal");
          if (s_[i_] == '\'') {
            if (i_ + 1 < s_.size() && s_[i_ + 1] == '\'') {
              v.push_back('\'');
              i_ += 2;
            } else {
              ++i_;
              break;
            }
          } else {
            v.push_back(s_[i_++]);
          }
        }
        out.push_back({Tok::String, v, start});
      } else if (c == '"' || c == '`' || c == '[') {
        const char close = c == '[' ? ']' : c;
        std::size_t j = i_ + 1;
        std::string v;
        while (j < s_.size() && s_[j] != close) v.push_back(s_[j++]);
        if (j >= s_.size())
          throw SyntaxError(start, "closing quote for identifier");
        out.push_back({Tok::QuotedIdent, v, start});
        i_ = j + 1;
      } else {
        static const char* two[] = {"==", "!=", "<>", "<=", ">=", "||"};
        std::string sym(1, c);
        if (i_ + 1 < s_.size()) {
          std::string pair = s_.substr(i_, 2);
          for (const char* t : two)
            if (pair == t) sym = pair;
        }
        if (std::string("()*,.=<>+-/%;").find(sym[0]) == std::string::npos &&
            sym.size() == 1 && sym != "!")
          throw SyntaxError(start, "valid token");
        out.push_back({Tok::Symbol, sym, start});
        i_ += sym.size();
      }
    }
    out.push_back({Tok::End, "", s_.size()});
    return out;
  }

 private:
  void skip_space() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == '-' && i_ + 1 < s_.size() && s_[i_ + 1] == '-') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }
  const std::string& s_;
  std::size_t i_ = 0;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, Dialect dialect)
      : toks_(std::move(toks)), dialect_(dialect) {}

  SqlAst parse() {
    if (is_kw_any(kUnsupportedLead)) throw UnsupportedFeature(peek().text);
    AstNode stmt = parse_compound();
    accept_sym(";");
    reject_unsupported();
    if (peek().kind != Tok::End) throw SyntaxError(peek().pos, "end of input");
    return SqlAst{std::move(stmt)};
  }

 private:
  // ---- token helpers ----
  const Token& peek(int ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& advance() { return toks_[pos_++]; }
  bool is_kw(const std::string& kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }
  bool is_kw_any(const std::set<std::string>& kws) const {
    return peek().kind == Tok::Ident && kws.count(peek().text) > 0;
  }
  bool accept_kw(const std::string& kw) {
    if (is_kw(kw)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_kw(const std::string& kw) {
    if (!accept_kw(kw)) throw SyntaxError(peek().pos, kw);
  }
  bool is_sym(const std::string& s) const {
    return peek().kind == Tok::Symbol && peek().text == s;
  }
  bool accept_sym(const std::string& s) {
    if (is_sym(s)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_sym(const std::string& s) {
    if (!accept_sym(s)) throw SyntaxError(peek().pos, s);
  }
  void reject_unsupported() const {
    if (is_kw_any(kUnsupportedAnywhere) || is_kw_any(kUnsupportedLead))
      throw UnsupportedFeature(peek().text);
  }

  // ---- grammar ----
  AstNode parse_compound() {
    AstNode left = parse_select_core();
    while (is_kw("union") || is_kw("intersect") || is_kw("except")) {
      AstNode set;
      set.kind = AstKind::SetOp;
      set.op = advance().text;
      if (accept_kw("all")) set.flag = true;
      AstNode right = parse_select_core();
      set.children.push_back(std::move(left));
      set.children.push_back(std::move(right));
      left = std::move(set);
    }
    parse_tail(left);
    return left;
  }

  // ORDER BY / LIMIT belong to the whole (possibly compound) statement.
  void parse_tail(AstNode& stmt) {
    if (accept_kw("order")) {
      expect_kw("by");
      do {
        AstNode ob;
        ob.kind = AstKind::OrderBy;
        ob.children.push_back(parse_expr());
        ob.direction = "asc";
        if (accept_kw("asc")) {
          ob.direction = "asc";
        } else if (accept_kw("desc")) {
          ob.direction = "desc";
        }
        if (accept_kw("nulls")) {
          if (accept_kw("first"))
            ob.nulls_order = "first";
          else if (accept_kw("last"))
            ob.nulls_order = "last";
          else
            throw SyntaxError(peek().pos, "FIRST or LAST");
        }
        stmt.children.push_back(std::move(ob));
      } while (accept_sym(","));
    }
    if (accept_kw("limit")) {
      AstNode lim;
      lim.kind = AstKind::Limit;
      if (peek().kind != Tok::Number)
        throw SyntaxError(peek().pos, "integer limit");
      AstNode n;
      n.kind = AstKind::Literal;
      n.lit = LiteralKind::Number;
      n.name = advance().text;
      lim.children.push_back(std::move(n));
      if (is_kw("offset")) throw UnsupportedFeature("offset");
      if (accept_sym(",")) throw UnsupportedFeature("limit offset");
      stmt.children.push_back(std::move(lim));
    }
  }

  AstNode parse_select_core() {
    reject_unsupported();
    expect_kw("select");
    AstNode sel;
    sel.kind = AstKind::SelectStmt;
    if (accept_kw("distinct")) sel.flag = true;
    accept_kw("all");

    AstNode list;
    list.kind = AstKind::SelectList;
    do {
      list.children.push_back(parse_select_item());
    } while (accept_sym(","));
    sel.children.push_back(std::move(list));

    if (accept_kw("from")) {
      AstNode from;
      from.kind = AstKind::FromItem;
      from.children.push_back(parse_join_tree());
      sel.children.push_back(std::move(from));
    }
    if (accept_kw("where")) {
      AstNode w;
      w.kind = AstKind::WhereClause;
      w.children.push_back(parse_expr());
      sel.children.push_back(std::move(w));
    }
    if (is_kw("group")) {
      advance();
      expect_kw("by");
      AstNode g;
      g.kind = AstKind::GroupBy;
      do {
        g.children.push_back(parse_expr());
      } while (accept_sym(","));
      sel.children.push_back(std::move(g));
    }
    if (accept_kw("having")) {
      AstNode h;
      h.kind = AstKind::Having;
      h.children.push_back(parse_expr());
      sel.children.push_back(std::move(h));
    }
    return sel;
  }

  AstNode parse_select_item() {
    if (is_sym("*")) {
      AstNode star;
      star.kind = AstKind::Star;
      advance();
      return star;
    }
    AstNode e = parse_expr();
    reject_unsupported();
    if (accept_kw("as")) {
      e.alias = expect_name();
    } else if (peek().kind == Tok::Ident && !is_kw_any(kReserved) &&
               !is_kw_any(kUnsupportedAnywhere)) {
      e.alias = advance().text;
    } else if (peek().kind == Tok::QuotedIdent) {
      e.alias = advance().text;
    }
    return e;
  }

  std::string expect_name() {
    if (peek().kind == Tok::Ident) {
      if (is_kw_any(kReserved)) throw SyntaxError(peek().pos, "identifier");
      return advance().text;
    }
    if (peek().kind == Tok::QuotedIdent) return advance().text;
    throw SyntaxError(peek().pos, "identifier");
  }

  AstNode parse_join_tree() {
    AstNode left = parse_table_source();
    while (true) {
      std::string jt;
      if (accept_sym(",")) {
        jt = "cross";
      } else if (is_kw("join") || is_kw("inner") || is_kw("left") ||
                 is_kw("right") || is_kw("full") || is_kw("cross")) {
        jt = "inner";
        if (accept_kw("inner")) {
          jt = "inner";
        } else if (accept_kw("left")) {
          jt = "left";
          accept_kw("outer");
        } else if (accept_kw("right")) {
          jt = "right";
          accept_kw("outer");
        } else if (accept_kw("full")) {
          jt = "full";
          accept_kw("outer");
        } else if (accept_kw("cross")) {
          jt = "cross";
        }
        expect_kw("join");
      } else if (is_kw("natural")) {
        throw UnsupportedFeature("natural");
      } else {
        break;
      }
      AstNode right = parse_table_source();
      AstNode join;
      join.kind = AstKind::JoinClause;
      join.op = jt;
      join.children.push_back(std::move(left));
      join.children.push_back(std::move(right));
      if (accept_kw("on")) {
        join.children.push_back(parse_expr());
        if (join.op == "cross") join.op = "inner";
      } else if (is_kw("using")) {
        throw UnsupportedFeature("using");
      }
      left = std::move(join);
    }
    return left;
  }

  AstNode parse_table_source() {
    if (accept_sym("(")) {
      if (is_kw("select")) {
        AstNode sub;
        sub.kind = AstKind::Subquery;
        sub.children.push_back(parse_compound());
        expect_sym(")");
        if (accept_kw("as")) {
          sub.alias = expect_name();
        } else if ((peek().kind == Tok::Ident && !is_kw_any(kReserved) &&
                    !is_kw_any(kUnsupportedAnywhere)) ||
                   peek().kind == Tok::QuotedIdent) {
          sub.alias = advance().text;
        }
        return sub;
      }
      // parenthesized join tree
      AstNode inner = parse_join_tree();
      expect_sym(")");
      return inner;
    }
    reject_unsupported();
    AstNode t;
    t.kind = AstKind::TableRef;
    t.name = expect_name();
    if (accept_kw("as")) {
      t.alias = expect_name();
    } else if ((peek().kind == Tok::Ident && !is_kw_any(kReserved) &&
                !is_kw_any(kUnsupportedAnywhere)) ||
               peek().kind == Tok::QuotedIdent) {
      t.alias = advance().text;
    }
    return t;
  }

  // ---- expressions ----
  AstNode parse_expr() { return parse_or(); }

  AstNode binop(std::string op, AstNode l, AstNode r) {
    AstNode n;
    n.kind = AstKind::BinaryOp;
    n.op = std::move(op);
    n.children.push_back(std::move(l));
    n.children.push_back(std::move(r));
    return n;
  }

  AstNode parse_or() {
    AstNode l = parse_and();
    while (accept_kw("or")) l = binop("or", std::move(l), parse_and());
    return l;
  }

  AstNode parse_and() {
    AstNode l = parse_not();
    while (accept_kw("and")) l = binop("and", std::move(l), parse_not());
    return l;
  }

  AstNode parse_not() {
    if (accept_kw("not")) {
      AstNode n;
      n.kind = AstKind::UnaryOp;
      n.op = "not";
      n.children.push_back(parse_not());
      return n;
    }
    return parse_comparison();
  }

  AstNode parse_comparison() {
    AstNode l = parse_additive();
    bool negate = false;
    if (is_kw("not") &&
        (peek(1).text == "in" || peek(1).text == "like" ||
         peek(1).text == "between")) {
      advance();
      negate = true;
    }
    AstNode result;
    bool matched = true;
    if (is_sym("=") || is_sym("==")) {
      advance();
      result = binop("=", std::move(l), parse_additive());
    } else if (is_sym("<>") || is_sym("!=")) {
      advance();
      result = binop("<>", std::move(l), parse_additive());
    } else if (is_sym("<=")) {
      advance();
      result = binop("<=", std::move(l), parse_additive());
    } else if (is_sym(">=")) {
      advance();
      result = binop(">=", std::move(l), parse_additive());
    } else if (is_sym("<")) {
      advance();
      result = binop("<", std::move(l), parse_additive());
    } else if (is_sym(">")) {
      advance();
      result = binop(">", std::move(l), parse_additive());
    } else if (accept_kw("like")) {
      result = binop("like", std::move(l), parse_additive());
    } else if (accept_kw("between")) {
      AstNode lo = parse_additive();
      expect_kw("and");
      AstNode hi = parse_additive();
      result.kind = AstKind::BinaryOp;
      result.op = "between";
      result.children.push_back(std::move(l));
      result.children.push_back(std::move(lo));
      result.children.push_back(std::move(hi));
    } else if (accept_kw("in")) {
      expect_sym("(");
      result.kind = AstKind::BinaryOp;
      result.op = "in";
      result.children.push_back(std::move(l));
      if (is_kw("select")) {
        AstNode sub;
        sub.kind = AstKind::Subquery;
        sub.children.push_back(parse_compound());
        result.children.push_back(std::move(sub));
      } else {
        do {
          result.children.push_back(parse_expr());
        } while (accept_sym(","));
      }
      expect_sym(")");
    } else if (accept_kw("is")) {
      bool isnot = accept_kw("not");
      if (!accept_kw("null")) throw SyntaxError(peek().pos, "NULL");
      result.kind = AstKind::UnaryOp;
      result.op = isnot ? "is_not_null" : "is_null";
      result.children.push_back(std::move(l));
    } else {
      matched = false;
      if (negate) throw SyntaxError(peek().pos, "IN, LIKE or BETWEEN");
      result = std::move(l);
    }
    if (negate && matched) {
      AstNode n;
      n.kind = AstKind::UnaryOp;
      n.op = "not";
      n.children.push_back(std::move(result));
      return n;
    }
    return result;
  }

  AstNode parse_additive() {
    AstNode l = parse_multiplicative();
    while (is_sym("+") || is_sym("-")) {
      std::string op = advance().text;
      l = binop(op, std::move(l), parse_multiplicative());
    }
    return l;
  }

  AstNode parse_multiplicative() {
    AstNode l = parse_unary();
    while (is_sym("*") || is_sym("/") || is_sym("%")) {
      std::string op = advance().text;
      l = binop(op, std::move(l), parse_unary());
    }
    return l;
  }

  AstNode parse_unary() {
    if (accept_sym("-")) {
      AstNode n;
      n.kind = AstKind::UnaryOp;
      n.op = "-";
      n.children.push_back(parse_unary());
      return n;
    }
    if (accept_sym("+")) return parse_unary();
    return parse_primary();
  }

  AstNode parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Symbol && t.text == "||")
      throw UnsupportedFeature("||");
    if (t.kind == Tok::Number) {
      advance();
      AstNode n;
      n.kind = AstKind::Literal;
      n.lit = LiteralKind::Number;
      n.name = t.text;
      return n;
    }
    if (t.kind == Tok::String) {
      advance();
      AstNode n;
      n.kind = AstKind::Literal;
      n.lit = LiteralKind::String;
      n.name = t.text;
      return n;
    }
    if (t.kind == Tok::Symbol && t.text == "(") {
      advance();
      if (is_kw("select")) {
        AstNode sub;
        sub.kind = AstKind::Subquery;
        sub.children.push_back(parse_compound());
        expect_sym(")");
        return sub;
      }
      AstNode e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "null") {
        advance();
        AstNode n;
        n.kind = AstKind::Literal;
        n.lit = LiteralKind::Null;
        n.name = "null";
        return n;
      }
      if (t.text == "true" || t.text == "false") {
        advance();
        AstNode n;
        n.kind = AstKind::Literal;
        n.lit = LiteralKind::Bool;
        n.name = t.text;
        return n;
      }
      if (t.text == "exists") {
        advance();
        expect_sym("(");
        if (!is_kw("select")) throw SyntaxError(peek().pos, "SELECT");
        AstNode sub;
        sub.kind = AstKind::Subquery;
        sub.children.push_back(parse_compound());
        expect_sym(")");
        AstNode n;
        n.kind = AstKind::UnaryOp;
        n.op = "exists";
        n.children.push_back(std::move(sub));
        return n;
      }
      if (is_kw_any(kUnsupportedAnywhere)) throw UnsupportedFeature(t.text);
      if (is_kw_any(kReserved)) throw SyntaxError(t.pos, "expression");
      // function call or column reference
      if (peek(1).kind == Tok::Symbol && peek(1).text == "(") {
        AstNode f;
        f.kind = AstKind::FuncCall;
        f.name = advance().text;
        advance();  // '('
        if (accept_kw("distinct")) f.flag = true;
        if (is_sym("*")) {
          advance();
          AstNode star;
          star.kind = AstKind::Star;
          f.children.push_back(std::move(star));
        } else if (!is_sym(")")) {
          do {
            f.children.push_back(parse_expr());
          } while (accept_sym(","));
        }
        expect_sym(")");
        return f;
      }
      return parse_column_ref();
    }
    if (t.kind == Tok::QuotedIdent) return parse_column_ref();
    throw SyntaxError(t.pos, "expression");
  }

  AstNode parse_column_ref() {
    std::string first;
    if (peek().kind == Tok::QuotedIdent) {
      first = advance().text;
    } else {
      first = expect_name();
    }
    if (accept_sym(".")) {
      if (is_sym("*")) {
        advance();
        AstNode star;
        star.kind = AstKind::Star;
        star.qualifier = first;
        return star;
      }
      AstNode c;
      c.kind = AstKind::ColumnRef;
      c.qualifier = first;
      if (peek().kind == Tok::QuotedIdent)
        c.name = advance().text;
      else
        c.name = expect_name();
      return c;
    }
    AstNode c;
    c.kind = AstKind::ColumnRef;
    c.name = first;
    return c;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Dialect dialect_;
};

}  // namespace

SqlAst parse_sql(const std::string& text, Dialect dialect) {
  if (text.empty()) throw SyntaxError(0, "non-empty SQL text");
  Lexer lex(text);
  Parser p(lex.run(), dialect);
  return p.parse();
}

namespace {

bool bare_ident_ok(const std::string& s) {
  if (s.empty()) return false;
  if (!std::islower(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  for (char c : s)
    if (!std::islower(static_cast<unsigned char>(c)) &&
        !std::isdigit(static_cast<unsigned char>(c)) && c != '_')
      return false;
  return kReserved.count(s) == 0 && kUnsupportedAnywhere.count(s) == 0 &&
         kUnsupportedLead.count(s) == 0 && s != "null" && s != "true" &&
         s != "false" && s != "exists";
}

std::string render_ident(const std::string& s) {
  if (bare_ident_ok(s)) return s;
  return "\"" + s + "\"";
}

std::string render_expr(const AstNode& n, bool parens);
std::string render_stmt(const AstNode& n);
std::string render_stmt_no_tail(const AstNode& n);

std::string render_literal(const AstNode& n) {
  switch (n.lit) {
    case LiteralKind::Number:
      return n.name;
    case LiteralKind::String: {
      std::string out = "'";
      for (char c : n.name) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
      }
      out.push_back('\'');
      return out;
    }
    case LiteralKind::Null:
      return "NULL";
    case LiteralKind::Bool:
      return n.name == "true" ? "TRUE" : "FALSE";
  }
  return n.name;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string render_expr(const AstNode& n, bool parens) {
  switch (n.kind) {
    case AstKind::Literal:
      return render_literal(n);
    case AstKind::ColumnRef:
      return n.qualifier.empty()
                 ? render_ident(n.name)
                 : render_ident(n.qualifier) + "." + render_ident(n.name);
    case AstKind::Star:
      return n.qualifier.empty() ? "*" : render_ident(n.qualifier) + ".*";
    case AstKind::FuncCall: {
      std::string out = render_ident(n.name) + "(";
      if (n.flag) out += "DISTINCT ";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        out += render_expr(n.children[i], false);
      }
      return out + ")";
    }
    case AstKind::Subquery:
      return "(" + render_stmt(n.children[0]) + ")";
    case AstKind::UnaryOp: {
      std::string body;
      if (n.op == "not") {
        body = "NOT " + render_expr(n.children[0], true);
      } else if (n.op == "-") {
        body = "-" + render_expr(n.children[0], true);
      } else if (n.op == "is_null") {
        body = render_expr(n.children[0], true) + " IS NULL";
      } else if (n.op == "is_not_null") {
        body = render_expr(n.children[0], true) + " IS NOT NULL";
      } else if (n.op == "exists") {
        body = "EXISTS " + render_expr(n.children[0], false);
      }
      return parens ? "(" + body + ")" : body;
    }
    case AstKind::BinaryOp: {
      std::string body;
      if (n.op == "between") {
        body = render_expr(n.children[0], true) + " BETWEEN " +
               render_expr(n.children[1], true) + " AND " +
               render_expr(n.children[2], true);
      } else if (n.op == "in") {
        body = render_expr(n.children[0], true) + " IN (";
        if (n.children.size() == 2 && n.children[1].kind == AstKind::Subquery) {
          body += render_stmt(n.children[1].children[0]);
        } else {
          for (std::size_t i = 1; i < n.children.size(); ++i) {
            if (i > 1) body += ", ";
            body += render_expr(n.children[i], false);
          }
        }
        body += ")";
      } else {
        std::string op = n.op;
        if (op == "and") op = "AND";
        if (op == "or") op = "OR";
        if (op == "like") op = "LIKE";
        body = render_expr(n.children[0], true) + " " + op + " " +
               render_expr(n.children[1], true);
      }
      return parens ? "(" + body + ")" : body;
    }
    default:
      return "";
  }
}

std::string render_table_source(const AstNode& n) {
  if (n.kind == AstKind::TableRef) {
    std::string out = render_ident(n.name);
    if (!n.alias.empty()) out += " AS " + render_ident(n.alias);
    return out;
  }
  if (n.kind == AstKind::Subquery) {
    std::string out = "(" + render_stmt(n.children[0]) + ")";
    if (!n.alias.empty()) out += " AS " + render_ident(n.alias);
    return out;
  }
  // join tree
  const AstNode& l = n.children[0];
  const AstNode& r = n.children[1];
  std::string jt;
  if (n.op == "inner") jt = "JOIN";
  else if (n.op == "cross") jt = "CROSS JOIN";
  else jt = upper(n.op) + " JOIN";
  std::string out = render_table_source(l) + " " + jt + " ";
  // right operand of a join must not itself be a bare join tree
  if (r.kind == AstKind::JoinClause)
    out += "(" + render_table_source(r) + ")";
  else
    out += render_table_source(r);
  for (std::size_t i = 2; i < n.children.size(); ++i)
    out += " ON " + render_expr(n.children[i], false);
  return out;
}

std::string render_select(const AstNode& n) {
  std::string out = "SELECT ";
  if (n.flag) out += "DISTINCT ";
  for (const AstNode& c : n.children) {
    switch (c.kind) {
      case AstKind::SelectList:
        for (std::size_t i = 0; i < c.children.size(); ++i) {
          if (i) out += ", ";
          out += render_expr(c.children[i], false);
          if (!c.children[i].alias.empty())
            out += " AS " + render_ident(c.children[i].alias);
        }
        break;
      case AstKind::FromItem:
        out += " FROM " + render_table_source(c.children[0]);
        break;
      case AstKind::WhereClause:
        out += " WHERE " + render_expr(c.children[0], false);
        break;
      case AstKind::GroupBy: {
        out += " GROUP BY ";
        for (std::size_t i = 0; i < c.children.size(); ++i) {
          if (i) out += ", ";
          out += render_expr(c.children[i], false);
        }
        break;
      }
      case AstKind::Having:
        out += " HAVING " + render_expr(c.children[0], false);
        break;
      default:
        break;  // OrderBy / Limit rendered by render_stmt
    }
  }
  return out;
}

std::string render_tail(const AstNode& n) {
  std::string out;
  bool first_ob = true;
  for (const AstNode& c : n.children) {
    if (c.kind == AstKind::OrderBy) {
      out += first_ob ? " ORDER BY " : ", ";
      first_ob = false;
      out += render_expr(c.children[0], false);
      out += c.direction == "desc" ? " DESC" : " ASC";
      if (!c.nulls_order.empty())
        out += c.nulls_order == "first" ? " NULLS FIRST" : " NULLS LAST";
    } else if (c.kind == AstKind::Limit) {
      out += " LIMIT " + c.children[0].name;
    }
  }
  return out;
}

std::string render_stmt(const AstNode& n) {
  if (n.kind == AstKind::SelectStmt) return render_select(n) + render_tail(n);
  // SetOp
  std::string out = render_stmt_no_tail(n.children[0]);
  out += " " + upper(n.op);
  if (n.flag) out += " ALL";
  out += " " + render_stmt_no_tail(n.children[1]);
  return out + render_tail(n);
}

std::string render_stmt_no_tail(const AstNode& n) {
  if (n.kind == AstKind::SelectStmt) return render_select(n);
  std::string out = render_stmt_no_tail(n.children[0]);
  out += " " + upper(n.op);
  if (n.flag) out += " ALL";
  out += " " + render_stmt_no_tail(n.children[1]);
  return out;
}

}  // namespace

std::string render_sql(const AstNode& n) { return render_stmt(n); }

std::string ast_to_json(const AstNode& n, int indent) {
  using nlohmann::json;
  std::function<json(const AstNode&)> conv = [&](const AstNode& x) {
    json j;
    j["kind"] = ast_kind_name(x.kind);
    if (!x.op.empty()) j["op"] = x.op;
    if (!x.name.empty() || x.kind == AstKind::Literal) j["name"] = x.name;
    if (!x.qualifier.empty()) j["qualifier"] = x.qualifier;
    if (!x.alias.empty()) j["alias"] = x.alias;
    if (x.flag) j["flag"] = true;
    if (!x.direction.empty()) j["direction"] = x.direction;
    if (!x.nulls_order.empty()) j["nulls"] = x.nulls_order;
    if (x.kind == AstKind::Literal) {
      switch (x.lit) {
        case LiteralKind::Number: j["literal_kind"] = "number"; break;
        case LiteralKind::String: j["literal_kind"] = "string"; break;
        case LiteralKind::Null: j["literal_kind"] = "null"; break;
        case LiteralKind::Bool: j["literal_kind"] = "bool"; break;
      }
    }
    if (x.binding)
      j["binding"] = x.binding->text();
    if (!x.children.empty()) {
      j["children"] = json::array();
      for (const AstNode& c : x.children) j["children"].push_back(conv(c));
    }
    return j;
  };
  return conv(n).dump(indent);
}

}  // namespace sqlfunc
