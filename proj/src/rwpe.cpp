#include "sqlfunc/rwpe.hpp"

#include <set>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

namespace {

constexpr int kMaxDenseNodes = 4096;

std::vector<std::vector<int>> symmetrized(const ProgramGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::set<std::pair<int, int>> seen;
  std::vector<std::vector<int>> adj(n);
  for (const GraphEdge& e : g.edges) {
    if (e.src == e.dst) continue;
    int a = std::min(e.src, e.dst), b = std::max(e.src, e.dst);
    if (!seen.insert({a, b}).second) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

Mat transition_from_adj(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  if (n > kMaxDenseNodes)
    throw Error("graph too large for dense positional encoding");
  Mat t(n, n);
  for (int i = 0; i < n; ++i) {
    if (adj[i].empty()) continue;
    const double inv = 1.0 / static_cast<double>(adj[i].size());
    for (int j : adj[i]) t.at(i, j) = inv;
  }
  return t;
}

Mat diag_powers(const Mat& t, int K) {
  const int n = t.rows;
  Mat pe(n, K);
  Mat power = t;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < n; ++i) pe.at(i, k) = power.at(i, i);
    if (k + 1 == K) break;
    Mat next(n, n);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        const double v = power.at(i, l);
        if (v == 0.0) continue;
        for (int j = 0; j < n; ++j) next.at(i, j) += v * t.at(l, j);
      }
    power = std::move(next);
  }
  return pe;
}

}  // namespace

Mat transition_matrix(const ProgramGraph& g) {
  return transition_from_adj(symmetrized(g));
}

Mat rwpe_from_adjacency(const std::vector<std::vector<int>>& adj, int K) {
  if (K < 1) throw Error("walk length K must be at least 1");
  return diag_powers(transition_from_adj(adj), K);
}

Mat rwpe_encode(const ProgramGraph& g, int K) {
  if (K < 1) throw Error("walk length K must be at least 1");
  return diag_powers(transition_from_adj(symmetrized(g)), K);
}

std::pair<Mat, Mat> global_rwpe_encode(const MergedGraph& m, int K) {
  if (K < 1) throw Error("walk length K must be at least 1");
  const int n1 = static_cast<int>(m.left.nodes.size());
  const int n2 = static_cast<int>(m.right.nodes.size());
  std::vector<std::vector<int>> adj(n1 + n2);
  std::set<std::pair<int, int>> seen;
  auto link = [&](int a, int b) {
    if (a == b) return;
    int lo = std::min(a, b), hi = std::max(a, b);
    if (!seen.insert({lo, hi}).second) return;
    adj[lo].push_back(hi);
    adj[hi].push_back(lo);
  };
  for (const GraphEdge& e : m.left.edges) link(e.src, e.dst);
  for (const GraphEdge& e : m.right.edges) link(n1 + e.src, n1 + e.dst);
  for (const CrossLink& c : m.cross_links) link(c.left, n1 + c.right);
  Mat pe = diag_powers(transition_from_adj(adj), K);
  Mat left(n1, K), right(n2, K);
  for (int i = 0; i < n1; ++i)
    for (int k = 0; k < K; ++k) left.at(i, k) = pe.at(i, k);
  for (int i = 0; i < n2; ++i)
    for (int k = 0; k < K; ++k) right.at(i, k) = pe.at(n1 + i, k);
  return {std::move(left), std::move(right)};
}

}  // namespace sqlfunc
