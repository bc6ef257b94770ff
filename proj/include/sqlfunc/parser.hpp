#pragma once

#include <string>

#include "sqlfunc/ast.hpp"

namespace sqlfunc {

enum class Dialect { Generic, Sqlite };

/// Parses one SELECT statement (optionally a compound with set operators).
/// Throws SyntaxError on malformed input and UnsupportedFeature on keywords
/// outside the supported grammar (DDL, window functions, CTEs, ...).
SqlAst parse_sql(const std::string& text, Dialect dialect = Dialect::Sqlite);

/// Renders an AST back to SQL text such that
/// parse_sql(render_sql(ast)) is structurally equal to ast.
std::string render_sql(const AstNode& n);

/// JSON export used by the `parse` CLI subcommand.
std::string ast_to_json(const AstNode& n, int indent = -1);

}  // namespace sqlfunc
