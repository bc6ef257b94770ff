#include <doctest.h>

#include <algorithm>
#include <set>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/graph.hpp"
#include "sqlfunc/relpm.hpp"
#include "test_util.hpp"

using namespace sqlfunc;

namespace {

int count_edges(const ProgramGraph& g, EdgeKind kind) {
  int n = 0;
  for (const GraphEdge& e : g.edges)
    if (e.kind == kind) ++n;
  return n;
}

}  // namespace

TEST_CASE("logic flow chains the five-operator pipeline with four edges") {
  Schema school = test_schema("school");
  Rot rot = canon_sql(
      "SELECT name FROM student WHERE age > 20 ORDER BY name LIMIT 5", school);
  ProgramGraph g = build_program_graph(rot);
  REQUIRE(g.layer2.size() == 5);
  CHECK(count_edges(g, EdgeKind::LogicFlow) == 4);
  // the chain visits the layer-2 roots in execution order
  std::vector<std::pair<int, int>> chain;
  for (const GraphEdge& e : g.edges)
    if (e.kind == EdgeKind::LogicFlow) chain.emplace_back(e.src, e.dst);
  for (std::size_t i = 0; i + 1 < g.layer2.size(); ++i)
    CHECK(std::count(chain.begin(), chain.end(),
                     std::make_pair(g.layer2[i], g.layer2[i + 1])) == 1);
}

TEST_CASE("without flows the edges are exactly the tree edges") {
  Schema school = test_schema("school");
  Rot rot = canon_sql("SELECT name FROM student WHERE age > 20", school);
  ProgramGraph g = build_program_graph(rot, FlowSet{false, false});
  CHECK(g.edges.size() == g.nodes.size() - 1);
  for (const GraphEdge& e : g.edges) CHECK(e.kind == EdgeKind::Syntax);
}

TEST_CASE("data flow links successive occurrences of the same column") {
  Schema school = test_schema("school");
  Rot rot = canon_sql("SELECT name FROM student ORDER BY name", school);
  ProgramGraph g = build_program_graph(rot);
  // occurrences of student.name: scan column list, sort key, projection
  std::vector<int> name_nodes;
  for (const GraphNode& n : g.nodes)
    if (!n.computing && n.label == "student.name") name_nodes.push_back(n.id);
  REQUIRE(name_nodes.size() == 3);
  std::vector<std::pair<int, int>> data;
  for (const GraphEdge& e : g.edges)
    if (e.kind == EdgeKind::DataFlow) data.emplace_back(e.src, e.dst);
  // one chain per column: occurrences-1 edges for student.name
  int name_edges = 0;
  for (auto& [s, d] : data)
    if (std::count(name_nodes.begin(), name_nodes.end(), s) &&
        std::count(name_nodes.begin(), name_nodes.end(), d))
      ++name_edges;
  CHECK(name_edges == 2);
  // the sort-key occurrence connects to the projection occurrence
  CHECK(std::count(data.begin(), data.end(),
                   std::make_pair(name_nodes[1], name_nodes[2])) == 1);
  // data-flow edges only connect equal labels
  for (const GraphEdge& e : g.edges)
    if (e.kind == EdgeKind::DataFlow)
      CHECK(g.nodes[e.src].label == g.nodes[e.dst].label);
}

TEST_CASE("edge kinds partition and syntax recovers the tree") {
  Schema school = test_schema("school");
  Rot rot = canon_sql(
      "SELECT student.name FROM student JOIN has_pet ON student.stuid = "
      "has_pet.stuid WHERE student.age > 7 ORDER BY student.name",
      school);
  ProgramGraph g = build_program_graph(rot);
  std::set<std::pair<int, int>> syntax;
  for (const GraphEdge& e : g.edges)
    if (e.kind == EdgeKind::Syntax) syntax.insert({e.src, e.dst});
  CHECK(syntax.size() == g.nodes.size() - 1);
  // non-syntax edges never duplicate a syntax edge
  for (const GraphEdge& e : g.edges)
    if (e.kind != EdgeKind::Syntax) CHECK(!syntax.count({e.src, e.dst}));
}

TEST_CASE("set operation branches chain into the set node") {
  Schema school = test_schema("school");
  Rot rot = canon_sql(
      "SELECT name FROM student WHERE age > 30 UNION SELECT name FROM student",
      school);
  ProgramGraph g = build_program_graph(rot);
  // layer-2: branch1 ops..., branch2 ops..., Union
  int union_id = g.layer2.back();
  CHECK(g.nodes[union_id].opcode == Opcode::Union);
  int into_union = 0;
  for (const GraphEdge& e : g.edges)
    if (e.kind == EdgeKind::LogicFlow && e.dst == union_id) ++into_union;
  CHECK(into_union == 2);
  CHECK(count_edges(g, EdgeKind::LogicFlow) ==
        static_cast<int>(g.layer2.size()) - 1);
}

TEST_CASE("merged pair: counts, links and seed validation") {
  Schema school = test_schema("school");
  Rot r1 = canon_sql("SELECT name FROM student WHERE age > 20", school);
  Rot r2 = canon_sql("SELECT name FROM student WHERE age > 20", school);
  ProgramGraph g1 = build_program_graph(r1);
  ProgramGraph g2 = build_program_graph(r2);
  auto seeds = find_seed_pairs(r1, r2);
  CHECK(seeds.size() == g1.layer2.size());  // identical queries: all seeded
  MergedGraph m = merge_graph_pair(g1, g2, seeds);
  CHECK(m.cross_links.size() == seeds.size() + 1);
  CHECK(m.cross_links[0].kind == LinkKind::RelsLink);
  CHECK(m.cross_links[0].left == 0);
  CHECK(m.cross_links[0].right == 0);
  // endpoints are unique
  std::set<int> ls, rs;
  for (const CrossLink& c : m.cross_links) {
    CHECK(ls.insert(c.left).second);
    CHECK(rs.insert(c.right).second);
  }

  // a non-layer-2 endpoint is rejected
  CHECK_THROWS_AS(merge_graph_pair(g1, g2, {{0, g2.layer2[0]}}), InvalidSeed);
  CHECK_THROWS_AS(
      merge_graph_pair(g1, g2,
                       {{g1.layer2[0], g2.layer2[0]},
                        {g1.layer2[0], g2.layer2[1]}}),
      InvalidSeed);

  // minimal merge: no seeds, just the root link
  MergedGraph tiny = merge_graph_pair(g1, g2, {});
  CHECK(tiny.cross_links.size() == 1);
}

TEST_CASE("json export round-trips") {
  Schema school = test_schema("school");
  Rot rot = canon_sql(
      "SELECT major, count(*) FROM student GROUP BY major HAVING count(*) > 2",
      school);
  ProgramGraph g = build_program_graph(rot);
  ProgramGraph back = graph_from_json(export_graph_json(g));
  CHECK(graph_eq(g, back));
  CHECK(back.layer2 == g.layer2);

  Rot r2 = canon_sql("SELECT major FROM student", school);
  ProgramGraph g2 = build_program_graph(r2);
  MergedGraph m = merge_graph_pair(g, g2, find_seed_pairs(rot, r2));
  MergedGraph mback = merged_from_json(export_merged_json(m));
  CHECK(graph_eq(m.left, mback.left));
  CHECK(graph_eq(m.right, mback.right));
  CHECK(mback.cross_links.size() == m.cross_links.size());
}

TEST_CASE("exports are deterministic and attention shapes are checked") {
  Schema school = test_schema("school");
  Rot rot = canon_sql("SELECT name FROM student", school);
  ProgramGraph g = build_program_graph(rot);
  CHECK(export_graph_dot(g) == export_graph_dot(g));
  CHECK(export_graph_dot(g).find("digraph") == 0);

  MergedGraph m = merge_graph_pair(g, g, find_seed_pairs(rot, rot));
  Mat bad(3, 3);
  CHECK_THROWS_AS(export_merged_dot(m, &bad), ShapeMismatch);
  Mat ok(static_cast<int>(m.left.nodes.size()),
         static_cast<int>(m.right.nodes.size()));
  for (int i = 0; i < ok.rows; ++i) ok.at(i, i % ok.cols) = 1.0;
  std::string dot = export_merged_dot(m, &ok);
  CHECK(dot.find("cluster_left") != std::string::npos);
  std::string json_text = export_merged_json(m, &ok);
  CHECK(json_text.find("attention") != std::string::npos);
}
