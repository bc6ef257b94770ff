#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "sqlfunc/graph.hpp"
#include "sqlfunc/relpm.hpp"
#include "sqlfunc/rwpe.hpp"
#include "sqlfunc/tensor.hpp"
#include "test_util.hpp"

using namespace sqlfunc;
using boost::multiprecision::cpp_rational;

namespace {

// Exact-arithmetic oracle over rationals: the k-step return probabilities
// computed by explicit dense matrix powers, independent of the float path.
std::vector<std::vector<double>> exact_rwpe(
    const std::vector<std::vector<int>>& adj, int K) {
  const int n = static_cast<int>(adj.size());
  std::vector<std::vector<cpp_rational>> t(n, std::vector<cpp_rational>(n, 0));
  for (int i = 0; i < n; ++i) {
    if (adj[i].empty()) continue;
    cpp_rational inv(1, static_cast<long>(adj[i].size()));
    for (int j : adj[i]) t[i][j] = inv;
  }
  std::vector<std::vector<cpp_rational>> power = t;
  std::vector<std::vector<double>> pe(n, std::vector<double>(K, 0.0));
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < n; ++i) pe[i][k] = static_cast<double>(power[i][i]);
    if (k + 1 == K) break;
    std::vector<std::vector<cpp_rational>> next(n,
                                                std::vector<cpp_rational>(n, 0));
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        if (power[i][l] == 0) continue;
        for (int j = 0; j < n; ++j)
          if (t[l][j] != 0) next[i][j] += power[i][l] * t[l][j];
      }
    power = std::move(next);
  }
  return pe;
}

ProgramGraph fake_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  ProgramGraph g;
  for (int i = 0; i < n; ++i) {
    GraphNode node;
    node.id = i;
    node.computing = true;
    node.opcode = Opcode::Rels;
    node.label = "n" + std::to_string(i);
    g.nodes.push_back(std::move(node));
  }
  for (auto [a, b] : edges) g.edges.push_back({a, b, EdgeKind::Syntax});
  return g;
}

std::vector<std::vector<int>> adjacency_of(const ProgramGraph& g) {
  std::vector<std::vector<int>> adj(g.nodes.size());
  std::set<std::pair<int, int>> seen;
  for (const GraphEdge& e : g.edges) {
    int a = std::min(e.src, e.dst), b = std::max(e.src, e.dst);
    if (a == b || !seen.insert({a, b}).second) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

ProgramGraph random_graph(Rng& rng, int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i)
    edges.emplace_back(rng.below(i), i);  // random spanning tree
  int extra = rng.below(n);
  for (int e = 0; e < extra; ++e) {
    int a = rng.below(n), b = rng.below(n);
    if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  return fake_graph(n, edges);
}

ProgramGraph random_tree_graph(Rng& rng, int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(rng.below(i), i);
  return fake_graph(n, edges);
}

}  // namespace

TEST_CASE("transition matrix closed forms") {
  ProgramGraph path = fake_graph(2, {{0, 1}});
  Mat t = transition_matrix(path);
  CHECK(t.at(0, 0) == 0.0);
  CHECK(t.at(0, 1) == 1.0);
  CHECK(t.at(1, 0) == 1.0);
  CHECK(t.at(1, 1) == 0.0);

  // star: center 0 with two leaves
  ProgramGraph star = fake_graph(3, {{0, 1}, {0, 2}});
  Mat ts = transition_matrix(star);
  CHECK(ts.at(0, 0) == 0.0);
  CHECK(ts.at(0, 1) == 0.5);
  CHECK(ts.at(0, 2) == 0.5);

  // isolated node has a zero row
  ProgramGraph iso = fake_graph(3, {{0, 1}});
  Mat ti = transition_matrix(iso);
  for (int j = 0; j < 3; ++j) CHECK(ti.at(2, j) == 0.0);

  // parallel edges collapse
  ProgramGraph multi = fake_graph(2, {{0, 1}, {0, 1}, {1, 0}});
  Mat tm = transition_matrix(multi);
  CHECK(tm.at(0, 1) == 1.0);
}

TEST_CASE("return probabilities: closed forms") {
  ProgramGraph path = fake_graph(2, {{0, 1}});
  Mat pe = rwpe_encode(path, 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(pe.at(i, 0) == 0.0);
    CHECK(pe.at(i, 1) == 1.0);
  }
  ProgramGraph tri = fake_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  Mat pt = rwpe_encode(tri, 2);
  for (int i = 0; i < 3; ++i) {
    CHECK(pt.at(i, 0) == 0.0);
    CHECK(pt.at(i, 1) == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("first column is always zero: no self loops") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    ProgramGraph g = random_graph(rng, 3 + rng.below(10));
    Mat pe = rwpe_encode(g, 4);
    for (int i = 0; i < pe.rows; ++i) CHECK(pe.at(i, 0) == 0.0);
  }
}

TEST_CASE("float encoding matches the exact rational oracle to 1e-12") {
  Rng rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    ProgramGraph g = random_graph(rng, 2 + rng.below(11));  // up to 12 nodes
    const int K = 16;
    Mat pe = rwpe_encode(g, K);
    auto oracle = exact_rwpe(adjacency_of(g), K);
    for (int i = 0; i < pe.rows; ++i)
      for (int k = 0; k < K; ++k) {
        CHECK(std::fabs(pe.at(i, k) - oracle[i][k]) <= 1e-12);
        CHECK(pe.at(i, k) >= 0.0);
        CHECK(pe.at(i, k) <= 1.0);
      }
  }
}

TEST_CASE("trees are bipartite: odd columns vanish") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    ProgramGraph g = random_tree_graph(rng, 2 + rng.below(11));
    Mat pe = rwpe_encode(g, 8);
    for (int i = 0; i < pe.rows; ++i)
      for (int k = 0; k < 8; k += 2)  // even indices hold odd walk lengths
        CHECK(pe.at(i, k) == 0.0);
  }
}

TEST_CASE("permutation equivariance") {
  Rng rng(55);
  ProgramGraph g = random_graph(rng, 9);
  const int K = 6;
  Mat pe = rwpe_encode(g, K);
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.below(static_cast<int>(i))]);
  ProgramGraph h = g;
  for (GraphNode& n : h.nodes) n.id = perm[n.id];
  std::sort(h.nodes.begin(), h.nodes.end(),
            [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
  for (GraphEdge& e : h.edges) {
    e.src = perm[e.src];
    e.dst = perm[e.dst];
  }
  Mat pe2 = rwpe_encode(h, K);
  for (int i = 0; i < 9; ++i)
    for (int k = 0; k < K; ++k)
      CHECK(pe.at(i, k) == doctest::Approx(pe2.at(perm[i], k)).epsilon(1e-15));
}

TEST_CASE("global encoding over the merged pair") {
  // two isolated single nodes plus the root link form a two-node path
  ProgramGraph one = fake_graph(1, {});
  MergedGraph m;
  m.left = one;
  m.right = one;
  m.cross_links.push_back({0, 0, LinkKind::RelsLink});
  auto [l, r] = global_rwpe_encode(m, 2);
  CHECK(l.at(0, 0) == 0.0);
  CHECK(l.at(0, 1) == 1.0);
  CHECK(r.at(0, 0) == 0.0);
  CHECK(r.at(0, 1) == 1.0);
}

TEST_CASE("merging a graph with itself lowers return probabilities") {
  Schema school = test_schema("school");
  Rot rot = canon_sql(
      "SELECT name FROM student WHERE age > 20 ORDER BY name LIMIT 5", school);
  ProgramGraph g = build_program_graph(rot);
  auto seeds = find_seed_pairs(rot, rot);
  MergedGraph m = merge_graph_pair(g, g, seeds);
  const int K = 8;
  Mat separate = rwpe_encode(g, K);
  auto [global_l, global_r] = global_rwpe_encode(m, K);
  // linked nodes gain extra escape routes: probabilities weakly decrease
  std::set<int> linked;
  for (const CrossLink& c : m.cross_links) linked.insert(c.left);
  double drop = 0.0;
  for (int id : linked)
    for (int k = 0; k < K; ++k) {
      CHECK(global_l.at(id, k) <= separate.at(id, k) + 1e-12);
      drop += separate.at(id, k) - global_l.at(id, k);
    }
  CHECK(drop > 0.0);
  // the self-merge is symmetric (up to summation-order rounding)
  for (int i = 0; i < separate.rows; ++i)
    for (int k = 0; k < K; ++k)
      CHECK(std::fabs(global_l.at(i, k) - global_r.at(i, k)) <= 1e-12);
}

TEST_CASE("beyond-horizon nodes keep their separate-mode encodings") {
  // path of six nodes; only nodes within K hops of the link see the merge
  ProgramGraph chain = fake_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  MergedGraph m;
  m.left = chain;
  m.right = chain;
  m.cross_links.push_back({0, 0, LinkKind::RelsLink});
  const int K = 4;
  Mat separate = rwpe_encode(chain, K);
  auto [gl, gr] = global_rwpe_encode(m, K);
  // node 5 sits five hops out: no closed walk of length <= 4 crosses the link
  for (int k = 0; k < K; ++k)
    CHECK(gl.at(5, k) == doctest::Approx(separate.at(5, k)).epsilon(1e-15));
  // node 1 is near the link and does change
  bool changed = false;
  for (int k = 0; k < K; ++k)
    if (std::fabs(gl.at(1, k) - separate.at(1, k)) > 1e-15) changed = true;
  CHECK(changed);
}
