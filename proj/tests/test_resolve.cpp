#include <doctest.h>

#include <functional>

#include "sqlfunc/errors.hpp"
#include "test_util.hpp"

using namespace sqlfunc;

namespace {

// every ColumnRef leaf must carry a binding
void check_fully_bound(const AstNode& n) {
  if (n.kind == AstKind::ColumnRef) {
    REQUIRE(n.binding.has_value());
    CHECK(!n.binding->instance.empty());
    CHECK(!n.binding->column.empty());
  }
  for (const AstNode& c : n.children) check_fully_bound(c);
}

const AstNode* first_column(const AstNode& n) {
  if (n.kind == AstKind::ColumnRef) return &n;
  for (const AstNode& c : n.children)
    if (const AstNode* hit = first_column(c)) return hit;
  return nullptr;
}

}  // namespace

TEST_CASE("single candidate binds to its table") {
  Schema school = test_schema("school");
  SqlAst r = resolve_names(parse_sql("SELECT sex FROM student"), school);
  const AstNode* col = first_column(r.root);
  REQUIRE(col);
  CHECK(col->binding->text() == "student.sex");
  check_fully_bound(r.root);
}

TEST_CASE("column in two in-scope tables is ambiguous") {
  Schema school = test_schema("school");
  CHECK_THROWS_AS(
      resolve_names(
          parse_sql("SELECT stuid FROM student JOIN has_pet ON 1 = 1"), school),
      AmbiguousColumn);
  // qualified access resolves fine
  SqlAst ok = resolve_names(
      parse_sql("SELECT student.stuid FROM student JOIN has_pet ON 1 = 1"),
      school);
  CHECK(first_column(ok.root)->binding->text() == "student.stuid");
}

TEST_CASE("alias scope binds through AS") {
  Schema school = test_schema("school");
  SqlAst r = resolve_names(parse_sql("SELECT s.sex FROM student AS s"), school);
  CHECK(first_column(r.root)->binding->text() == "student.sex");
  // the alias hides the table name
  CHECK_THROWS_AS(
      resolve_names(parse_sql("SELECT student.sex FROM student AS s"), school),
      UnknownTable);
}

TEST_CASE("unknown table and column") {
  Schema school = test_schema("school");
  CHECK_THROWS_AS(resolve_names(parse_sql("SELECT a FROM missing"), school),
                  UnknownTable);
  CHECK_THROWS_AS(resolve_names(parse_sql("SELECT missing FROM student"), school),
                  UnknownColumn);
}

TEST_CASE("self-join instances stay distinguishable") {
  Schema school = test_schema("school");
  SqlAst r = resolve_names(
      parse_sql("SELECT s1.name FROM student AS s1 JOIN student AS s2 ON "
                "s1.stuid = s2.stuid"),
      school);
  const AstNode* col = first_column(r.root);
  CHECK(col->binding->text() == "student.name");
  // the join condition references both instances
  const AstNode& join = r.root.children[1].children[0];
  const AstNode& cond = join.children[2];
  CHECK(cond.children[0].binding->text() == "student.stuid");
  CHECK(cond.children[1].binding->text() == "student#2.stuid");
}

TEST_CASE("subquery outputs: pass-through keeps base binding") {
  Schema school = test_schema("school");
  SqlAst r = resolve_names(
      parse_sql("SELECT a.sex FROM (SELECT sex, age FROM student) AS a"),
      school);
  CHECK(first_column(r.root)->binding->text() == "student.sex");
  // computed outputs are synthetic
  SqlAst c = resolve_names(
      parse_sql("SELECT a.total FROM (SELECT age + 1 AS total FROM student) "
                "AS a"),
      school);
  CHECK(first_column(c.root)->binding->text() == "a.total");
}

TEST_CASE("order by alias and position resolve to select expressions") {
  Schema school = test_schema("school");
  SqlAst r = resolve_names(
      parse_sql("SELECT age + 1 AS x FROM student ORDER BY x"), school);
  const AstNode* ob = nullptr;
  for (const AstNode& c : r.root.children)
    if (c.kind == AstKind::OrderBy) ob = &c;
  REQUIRE(ob);
  CHECK(ob->children[0].op == "+");  // replaced by the aliased expression

  SqlAst p = resolve_names(
      parse_sql("SELECT name, age FROM student ORDER BY 2"), school);
  for (const AstNode& c : p.root.children)
    if (c.kind == AstKind::OrderBy)
      CHECK(c.children[0].binding->text() == "student.age");
}

TEST_CASE("correlated subquery reaches the outer scope") {
  Schema school = test_schema("school");
  SqlAst r = resolve_names(
      parse_sql("SELECT name FROM student WHERE EXISTS (SELECT 1 FROM has_pet "
                "WHERE has_pet.stuid = student.stuid)"),
      school);
  check_fully_bound(r.root);
}

TEST_CASE("resolution does not mutate its input") {
  Schema school = test_schema("school");
  SqlAst ast = parse_sql("SELECT sex FROM student");
  resolve_names(ast, school);
  CHECK(!first_column(ast.root)->binding.has_value());
}
