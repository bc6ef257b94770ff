#include <doctest.h>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/parser.hpp"
#include "test_util.hpp"

using namespace sqlfunc;

TEST_CASE("minimal statement shape") {
  SqlAst ast = parse_sql("SELECT a FROM t");
  const AstNode& root = ast.root;
  REQUIRE(root.kind == AstKind::SelectStmt);
  REQUIRE(root.children.size() == 2);
  const AstNode& list = root.children[0];
  CHECK(list.kind == AstKind::SelectList);
  REQUIRE(list.children.size() == 1);
  CHECK(list.children[0].kind == AstKind::ColumnRef);
  CHECK(list.children[0].name == "a");
  const AstNode& from = root.children[1];
  CHECK(from.kind == AstKind::FromItem);
  CHECK(from.children[0].kind == AstKind::TableRef);
  CHECK(from.children[0].name == "t");
}

TEST_CASE("missing select list is a syntax error at FROM") {
  try {
    parse_sql("SELECT FROM");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.position == 7);  // byte offset of FROM
    CHECK(e.expected == "expression");
  }
}

TEST_CASE("group by and having children") {
  SqlAst ast = parse_sql("SELECT count(*) FROM t GROUP BY c HAVING count(*) > 2");
  const AstNode& root = ast.root;
  bool has_group = false, has_having = false;
  for (const AstNode& c : root.children) {
    if (c.kind == AstKind::GroupBy) {
      has_group = true;
      CHECK(c.children.size() == 1);
      CHECK(c.children[0].name == "c");
    }
    if (c.kind == AstKind::Having) {
      has_having = true;
      REQUIRE(c.children.size() == 1);
      const AstNode& cmp = c.children[0];
      CHECK(cmp.op == ">");
      CHECK(cmp.children[0].kind == AstKind::FuncCall);
      CHECK(cmp.children[0].name == "count");
      CHECK(cmp.children[0].children[0].kind == AstKind::Star);
    }
  }
  CHECK(has_group);
  CHECK(has_having);
}

TEST_CASE("parsing is deterministic") {
  const std::string q =
      "SELECT s.name, count(*) FROM student AS s JOIN has_pet ON s.stuid = "
      "has_pet.stuid WHERE s.age > 20 GROUP BY s.name ORDER BY count(*) DESC "
      "LIMIT 3";
  CHECK(ast_structural_eq(parse_sql(q).root, parse_sql(q).root));
}

TEST_CASE("unsupported features are rejected with the offending token") {
  CHECK_THROWS_AS(parse_sql("CREATE TABLE t (a int)"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_sql("WITH x AS (SELECT 1) SELECT * FROM x"),
                  UnsupportedFeature);
  CHECK_THROWS_AS(
      parse_sql("SELECT rank() OVER (ORDER BY a) FROM t"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_sql("SELECT CASE WHEN a THEN 1 END FROM t"),
                  UnsupportedFeature);
  CHECK_THROWS_AS(parse_sql("SELECT a FROM t LIMIT 5 OFFSET 2"),
                  UnsupportedFeature);
  try {
    parse_sql("SELECT CAST(a AS int) FROM t");
    FAIL("expected UnsupportedFeature");
  } catch (const UnsupportedFeature& e) {
    CHECK(e.token == "cast");
  }
}

TEST_CASE("case folding: identifiers fold, string literals keep case") {
  SqlAst ast = parse_sql("SELECT Name FROM Pets WHERE PetType = 'Dog'");
  CHECK(ast.root.children[0].children[0].name == "name");
  CHECK(ast.root.children[1].children[0].name == "pets");
  const AstNode& where = ast.root.children[2];
  CHECK(where.children[0].children[1].name == "Dog");
  // quoted identifiers keep case
  SqlAst q = parse_sql("SELECT \"Name\" FROM t");
  CHECK(q.root.children[0].children[0].name == "Name");
}

TEST_CASE("operator precedence") {
  SqlAst ast = parse_sql("SELECT 1 WHERE a or b and not c = 1 + 2 * 3");
  const AstNode& w = ast.root.children[1];
  REQUIRE(w.kind == AstKind::WhereClause);
  const AstNode& top = w.children[0];
  CHECK(top.op == "or");
  CHECK(top.children[1].op == "and");
  const AstNode& n = top.children[1].children[1];
  CHECK(n.op == "not");
  const AstNode& eq = n.children[0];
  CHECK(eq.op == "=");
  CHECK(eq.children[1].op == "+");
  CHECK(eq.children[1].children[1].op == "*");
}

TEST_CASE("set operations, IN, BETWEEN, LIKE, subqueries") {
  SqlAst u = parse_sql("SELECT a FROM t UNION ALL SELECT b FROM u ORDER BY 1 LIMIT 2");
  CHECK(u.root.kind == AstKind::SetOp);
  CHECK(u.root.op == "union");
  CHECK(u.root.flag);
  // tail attaches to the compound
  CHECK(u.root.children.size() == 4);

  SqlAst in_list = parse_sql("SELECT a FROM t WHERE b IN (1, 2, 3)");
  const AstNode& in_expr = in_list.root.children[2].children[0];
  CHECK(in_expr.op == "in");
  CHECK(in_expr.children.size() == 4);

  SqlAst in_sub = parse_sql(
      "SELECT a FROM t WHERE b NOT IN (SELECT c FROM u) AND d LIKE '%x%' AND e "
      "BETWEEN 1 AND 5");
  const AstNode& conj = in_sub.root.children[2].children[0];
  CHECK(conj.op == "and");

  SqlAst sub = parse_sql("SELECT a FROM (SELECT a, b FROM t) AS s");
  CHECK(sub.root.children[1].children[0].kind == AstKind::Subquery);
  CHECK(sub.root.children[1].children[0].alias == "s");
}

TEST_CASE("render round-trips through the parser") {
  const char* queries[] = {
      "SELECT a FROM t",
      "SELECT DISTINCT a, b AS x FROM t WHERE a > 3 AND b < 2 OR NOT c = 1",
      "SELECT count(*), max(age) FROM student GROUP BY major HAVING count(*) > 2",
      "SELECT s.name FROM student AS s LEFT JOIN has_pet ON s.stuid = "
      "has_pet.stuid ORDER BY s.name DESC NULLS LAST LIMIT 10",
      "SELECT a FROM t WHERE b IN (1, 2) AND c BETWEEN 0 AND 9 AND d LIKE 'x%'",
      "SELECT a FROM t WHERE b IN (SELECT c FROM u WHERE d = 'Dog')",
      "SELECT a FROM t UNION SELECT b FROM u",
      "SELECT name FROM events WHERE ts_date IS NOT NULL",
      "SELECT a FROM (SELECT a, b FROM t WHERE b > 0) AS s WHERE a < 5",
      "SELECT 1 + 2 * 3, -a FROM t",
      "SELECT count(DISTINCT a) FROM t",
      "SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u WHERE u.x = t.a)",
  };
  for (const char* q : queries) {
    CAPTURE(q);
    SqlAst ast = parse_sql(q);
    std::string rendered = render_sql(ast.root);
    CAPTURE(rendered);
    SqlAst again = parse_sql(rendered);
    CHECK(ast_structural_eq(ast.root, again.root));
  }
}

TEST_CASE("empty input") {
  CHECK_THROWS_AS(parse_sql(""), SyntaxError);
}
