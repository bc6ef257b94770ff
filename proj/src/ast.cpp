#include "sqlfunc/ast.hpp"

namespace sqlfunc {

const char* ast_kind_name(AstKind k) {
  switch (k) {
    case AstKind::SelectStmt: return "SelectStmt";
    case AstKind::SelectList: return "SelectList";
    case AstKind::FromItem: return "FromItem";
    case AstKind::JoinClause: return "JoinClause";
    case AstKind::WhereClause: return "WhereClause";
    case AstKind::GroupBy: return "GroupBy";
    case AstKind::Having: return "Having";
    case AstKind::OrderBy: return "OrderBy";
    case AstKind::Limit: return "Limit";
    case AstKind::SetOp: return "SetOp";
    case AstKind::Subquery: return "Subquery";
    case AstKind::FuncCall: return "FuncCall";
    case AstKind::BinaryOp: return "BinaryOp";
    case AstKind::UnaryOp: return "UnaryOp";
    case AstKind::ColumnRef: return "ColumnRef";
    case AstKind::TableRef: return "TableRef";
    case AstKind::Literal: return "Literal";
    case AstKind::Star: return "Star";
  }
  return "?";
}

bool ast_structural_eq(const AstNode& a, const AstNode& b) {
  if (a.kind != b.kind || a.op != b.op || a.name != b.name ||
      a.qualifier != b.qualifier || a.alias != b.alias || a.flag != b.flag ||
      a.direction != b.direction || a.nulls_order != b.nulls_order)
    return false;
  if (a.kind == AstKind::Literal && a.lit != b.lit) return false;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!ast_structural_eq(a.children[i], b.children[i])) return false;
  return true;
}

std::size_t ast_size(const AstNode& n) {
  std::size_t c = 1;
  for (const AstNode& ch : n.children) c += ast_size(ch);
  return c;
}

}  // namespace sqlfunc
