#pragma once

#include "sqlfunc/ast.hpp"
#include "sqlfunc/schema.hpp"

namespace sqlfunc {

/// Resolves every ColumnRef of `ast` against `schema` and returns a copy
/// with bindings filled in. Table/column identifier comparison is
/// case-insensitive; string literals keep their case.
///
/// Each base-table occurrence in FROM gets a scan instance name: the table
/// name for the first occurrence, "name#2", "name#3", ... for repeats, so
/// self-joins stay distinguishable independent of the aliases chosen.
/// Subqueries without an alias get instances "subq", "subq#2", ...
///
/// Throws UnknownTable, UnknownColumn, AmbiguousColumn.
SqlAst resolve_names(const SqlAst& ast, const Schema& schema);

}  // namespace sqlfunc
