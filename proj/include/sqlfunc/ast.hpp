#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sqlfunc {

enum class AstKind {
  SelectStmt,
  SelectList,
  FromItem,
  JoinClause,
  WhereClause,
  GroupBy,
  Having,
  OrderBy,
  Limit,
  SetOp,
  Subquery,
  FuncCall,
  BinaryOp,
  UnaryOp,
  ColumnRef,
  TableRef,
  Literal,
  Star,
};

enum class LiteralKind { Number, String, Null, Bool };

const char* ast_kind_name(AstKind k);

/// One AST node. Field usage depends on `kind`:
///   SelectStmt : flag = DISTINCT; children = [SelectList, FromItem?,
///                WhereClause?, GroupBy?, Having?, OrderBy..., Limit?]
///   SelectList : children = select expressions (Star allowed)
///   FromItem   : children = [single join tree / table / subquery]
///   JoinClause : op = inner|left|right|full|cross; children = [left, right,
///                condition?]
///   WhereClause/Having : children = [expr]
///   GroupBy    : children = key expressions
///   OrderBy    : direction = asc|desc, nulls_order = ""|first|last;
///                children = [key expr]  (one node per sort key)
///   Limit      : children = [Literal]
///   SetOp      : op = union|intersect|except, flag = ALL; children =
///                [left stmt, right stmt, OrderBy..., Limit?]
///   Subquery   : alias; children = [SelectStmt or SetOp]
///   FuncCall   : name, flag = DISTINCT; children = args (Star for count(*))
///   BinaryOp   : op in {=, <>, <, <=, >, >=, +, -, *, /, %, and, or, like,
///                in, between}; `in` children = [expr, items... | Subquery],
///                `between` children = [expr, lo, hi]
///   UnaryOp    : op in {not, -, is_null, is_not_null, exists}
///   ColumnRef  : qualifier (optional table/alias), name
///   TableRef   : name, alias
///   Literal    : name = text, lit
///   Star       : qualifier (optional, for t.*)
struct AstNode {
  AstKind kind{};
  std::string op;
  std::string name;
  std::string qualifier;
  std::string alias;
  LiteralKind lit{LiteralKind::Number};
  bool flag = false;
  std::string direction;
  std::string nulls_order;

  /// Resolution result for ColumnRef nodes: the owning scan instance
  /// ("student", "student#2", subquery alias) plus the column name.
  struct Binding {
    std::string instance;
    std::string column;
    std::string text() const { return instance + "." + column; }
  };
  std::optional<Binding> binding;

  std::vector<AstNode> children;
};

struct SqlAst {
  AstNode root;
};

/// Structural equality ignoring bindings (parse-level comparison).
bool ast_structural_eq(const AstNode& a, const AstNode& b);

/// Total node count.
std::size_t ast_size(const AstNode& n);

}  // namespace sqlfunc
