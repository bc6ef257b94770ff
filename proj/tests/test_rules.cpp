#include <doctest.h>

#include <algorithm>
#include <functional>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/relpm.hpp"
#include "test_util.hpp"

using namespace sqlfunc;

namespace {

const char* kPushdownA =
    "SELECT student.name FROM has_pet JOIN student ON has_pet.stuid = "
    "student.stuid JOIN pets ON has_pet.petid = pets.petid WHERE pets.pettype "
    "= 'dog' AND student.sex = 'F'";

const char* kPushdownB =
    "SELECT t2.name FROM (SELECT * FROM has_pet) AS t1 JOIN (SELECT * FROM "
    "student WHERE sex = 'F') AS t2 ON t1.stuid = t2.stuid JOIN (SELECT * "
    "FROM pets WHERE pettype = 'dog') AS t3 ON t1.petid = t3.petid";

}  // namespace

TEST_CASE("pushdown pair canonicalizes to the identical tree") {
  Schema school = test_schema("school");
  Rot a = canon_sql(kPushdownA, school);
  Rot b = canon_sql(kPushdownB, school);
  CHECK(rot_structural_eq(a, b));
  CHECK(relpm_score(a, b).f_beta == 1.0);
  // filters now sit directly above their scans
  std::vector<Opcode> ops;
  for (const RotNode& c : a.root.children) ops.push_back(c.op);
  CHECK(std::count(ops.begin(), ops.end(), Opcode::Filter) == 2);
  CHECK(std::count(ops.begin(), ops.end(), Opcode::JoinInner) == 2);
}

TEST_CASE("constant folding identities") {
  Schema school = test_schema("school");
  // 1=1 AND p collapses to p
  Rot folded = canon_sql("SELECT name FROM student WHERE 1 = 1 AND age > 2",
                         school);
  Rot plain = canon_sql("SELECT name FROM student WHERE age > 2", school);
  CHECK(rot_structural_eq(folded, plain));

  // 1=0 empties the pipeline
  Rot empty = canon_sql("SELECT name FROM student WHERE 1 = 0", school);
  REQUIRE(empty.root.children.size() == 2);
  CHECK(empty.root.children[0].op == Opcode::Values);
  CHECK(empty.root.children[0].children[0].text == "empty");
  CHECK(empty.root.children[1].op == Opcode::Project);
}

TEST_CASE("more folding: NOT elimination, arithmetic, BETWEEN") {
  Schema school = test_schema("school");
  CHECK(rot_structural_eq(
      canon_sql("SELECT name FROM student WHERE NOT (age <= 3)", school),
      canon_sql("SELECT name FROM student WHERE age > 3", school)));
  CHECK(rot_structural_eq(
      canon_sql("SELECT name FROM student WHERE age > 1 + 2", school),
      canon_sql("SELECT name FROM student WHERE age > 3", school)));
  CHECK(rot_structural_eq(
      canon_sql("SELECT name FROM student WHERE age BETWEEN 10 AND 20", school),
      canon_sql("SELECT name FROM student WHERE age >= 10 AND age <= 20",
                school)));
  CHECK(rot_structural_eq(
      canon_sql("SELECT name FROM student WHERE age IN (5)", school),
      canon_sql("SELECT name FROM student WHERE age = 5", school)));
}

TEST_CASE("column pruning drops the unused subquery column") {
  Schema school = test_schema("school");
  Rot pruned = canon_sql(
      "SELECT sex FROM (SELECT sex, age FROM student) AS s", school,
      RuleSet::single(RuleId::ColumnPrune));
  // the inner projection lost `age`
  REQUIRE(pruned.root.children.size() == 3);
  const RotNode& inner = pruned.root.children[1];
  REQUIRE(inner.op == Opcode::Project);
  REQUIRE(inner.children.size() == 1);
  CHECK(inner.children[0].text == "student.sex");
}

TEST_CASE("pruned subquery equals the direct query after all rules") {
  Schema school = test_schema("school");
  // prune shrinks the inner projection; the duplicate-projection rule then
  // collapses the stack onto the plain form
  CHECK(rot_structural_eq(
      canon_sql("SELECT sex FROM (SELECT sex, age FROM student) AS s", school),
      canon_sql("SELECT sex FROM student", school)));
  CHECK(rot_structural_eq(
      canon_sql("SELECT sex FROM (SELECT sex, age FROM student) AS s", school),
      canon_sql("SELECT sex FROM (SELECT sex FROM student) AS s", school)));
}

TEST_CASE("star equals the explicit full column list") {
  Schema school = test_schema("school");
  Rot star = canon_sql("SELECT * FROM pets", school);
  Rot cols = canon_sql("SELECT petid, pettype, pet_age, weight FROM pets",
                       school);
  CHECK(rot_structural_eq(star, cols));
  // the output projection stays: it pins the result column order
  CHECK(star.root.children.back().op == Opcode::Project);
}

TEST_CASE("inner identity projections vanish, the root one stays") {
  Schema school = test_schema("school");
  // the inner SELECT * adds nothing
  CHECK(rot_structural_eq(
      canon_sql("SELECT sex FROM (SELECT * FROM student) AS s", school),
      canon_sql("SELECT sex FROM student", school)));
  // nested stacking collapses too
  CHECK(rot_structural_eq(
      canon_sql("SELECT sex FROM (SELECT * FROM (SELECT * FROM student) AS a) "
                "AS b",
                school),
      canon_sql("SELECT sex FROM student", school)));
}

TEST_CASE("aggregate pipeline keeps one aggregate call per subtree") {
  Schema events = test_schema("events");
  Rot rot = canon_sql("SELECT max(ts_date) FROM events", events);
  std::vector<Opcode> ops;
  for (const RotNode& c : rot.root.children) ops.push_back(c.op);
  CHECK(ops == std::vector<Opcode>{Opcode::TableScan, Opcode::HashAggregate,
                                   Opcode::Project});
  // exactly one ts_date occurrence inside the aggregate subtree
  int ts_count = 0;
  std::function<void(const RotNode&)> count = [&](const RotNode& n) {
    if (n.content && n.text == "events.ts_date") ++ts_count;
    for (const RotNode& c : n.children) count(c);
  };
  count(rot.root.children[1]);
  CHECK(ts_count == 1);
}

TEST_CASE("commutative normalization") {
  Schema school = test_schema("school");
  CHECK(rot_structural_eq(
      canon_sql("SELECT name FROM student WHERE age > 20 AND sex = 'F'", school),
      canon_sql("SELECT name FROM student WHERE sex = 'F' AND age > 20",
                school)));
  CHECK(rot_structural_eq(
      canon_sql("SELECT name FROM student WHERE age < 3", school),
      canon_sql("SELECT name FROM student WHERE 3 > age", school)));
  CHECK(rot_structural_eq(
      canon_sql("SELECT student.name FROM student JOIN has_pet ON "
                "student.stuid = has_pet.stuid",
                school),
      canon_sql("SELECT student.name FROM has_pet JOIN student ON "
                "has_pet.stuid = student.stuid",
                school)));
  CHECK(rot_structural_eq(
      canon_sql("SELECT major, sex FROM student GROUP BY major, sex", school),
      canon_sql("SELECT major, sex FROM student GROUP BY sex, major", school)));
  // operator direction survives normalization: a > 3 differs from a < 3
  CHECK(!rot_structural_eq(
      canon_sql("SELECT name FROM student WHERE age > 3", school),
      canon_sql("SELECT name FROM student WHERE age < 3", school)));
}

TEST_CASE("canonicalization is idempotent on a mixed corpus") {
  Schema school = test_schema("school");
  const char* queries[] = {
      kPushdownA,
      kPushdownB,
      "SELECT DISTINCT major FROM student ORDER BY major LIMIT 3",
      "SELECT major, count(*) FROM student GROUP BY major HAVING count(*) > 1",
      "SELECT name FROM student WHERE stuid IN (SELECT stuid FROM has_pet) "
      "AND age < 30",
      "SELECT name FROM student UNION SELECT pettype FROM pets",
      "SELECT name FROM student WHERE age BETWEEN 1 AND 99 ORDER BY name",
  };
  for (const char* q : queries) {
    CAPTURE(q);
    Rot once = canon_sql(q, school);
    Rot twice = canonicalize(once);
    CHECK(rot_structural_eq(once, twice));
  }
}

TEST_CASE("layer invariant holds after every rule") {
  Schema school = test_schema("school");
  Rot r = canon_sql(kPushdownA, school);
  validate_rot(r);  // would have thrown during canonicalize otherwise
  for (const RotNode& c : r.root.children)
    CHECK(opcode_is_relational(c.op));
}

TEST_CASE("exhausting max_passes while still changing reports the bound") {
  Schema school = test_schema("school");
  Rot raw = lower_sql(kPushdownA, school);
  RuleSet rs = RuleSet::default_set();
  rs.max_passes = 1;  // the pushdown needs a confirming pass
  CHECK_THROWS_AS(canonicalize(raw, rs), FixpointNotReached);
}

TEST_CASE("validator rejects malformed trees") {
  // content node at layer 2
  Rot bad;
  bad.root = RotNode::computing(Opcode::Rels);
  bad.root.children.push_back(
      RotNode::make_content(ContentKind::Table, "oops"));
  CHECK_THROWS_AS(validate_rot(bad), InvalidRot);

  // join lacking inputs
  Rot starved;
  starved.root = RotNode::computing(Opcode::Rels);
  starved.root.children.push_back(RotNode::computing(
      Opcode::JoinInner, {RotNode::make_content(ContentKind::Literal, "true")}));
  CHECK_THROWS_AS(validate_rot(starved), InvalidRot);

  // expression operator at layer 2
  Rot expr_op;
  expr_op.root = RotNode::computing(Opcode::Rels);
  expr_op.root.children.push_back(RotNode::computing(
      Opcode::Gt, {RotNode::make_content(ContentKind::Literal, "1"),
                   RotNode::make_content(ContentKind::Literal, "2")}));
  CHECK_THROWS_AS(validate_rot(expr_op), InvalidRot);
}
