#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqlfunc/ast.hpp"
#include "sqlfunc/rot.hpp"

namespace sqlfunc {

struct MatchConfig {
  double alpha = 0.5;  // parent weight vs. children mean, in (0,1)
  double beta = 2.0;   // F-beta recall weight, > 0
  /// Optional per-opcode weighting replacing the uniform child mean; keys
  /// are opcode names, content children use key "#content". Weights are
  /// normalized per sibling set.
  std::optional<std::map<std::string, double>> node_weights;
  bool swap_roles = false;  // flip which direction counts as precision
};

struct MatchResult {
  double precision = 0.0;
  double recall = 0.0;
  double f_beta = 0.0;
  /// Best match score seen for each source-tree node (preorder ids).
  std::map<int, double> per_node;
};

/// Flattened tree view shared by RelPM (operator trees) and ASTPM (raw
/// syntax trees). Node ids are preorder positions.
struct MatchTree {
  struct Node {
    std::string val;
    std::string weight_key;
    std::vector<int> children;
  };
  std::vector<Node> nodes;

  static MatchTree from_rot(const RotNode& root);
  static MatchTree from_ast(const AstNode& root);
};

/// 1 iff the two node values are equal (opcode equality for computing
/// nodes, exact text equality for content nodes).
int calc_node(const MatchTree& a, int ai, const MatchTree& b, int bi);

/// Recursive partial match of s against t: the node's own score weighted
/// alpha against the mean over s-children of the best-matching t-child.
double node_match(const MatchTree& s, const MatchTree& t,
                  const MatchConfig& cfg);

MatchResult relpm_score(const Rot& source, const Rot& target,
                        const MatchConfig& cfg = {});
MatchResult astpm_score(const SqlAst& a, const SqlAst& b,
                        const MatchConfig& cfg = {});
MatchResult match_trees(const MatchTree& source, const MatchTree& target,
                        const MatchConfig& cfg);

double f_beta_score(double precision, double recall, double beta);

/// Greedy one-to-one pairing, in document order, of layer-2 operator roots
/// whose subtrees match exactly. Returned ids are preorder node ids of the
/// respective trees (Rels root = 0), aligned with program-graph node ids.
std::vector<std::pair<int, int>> find_seed_pairs(const Rot& r1, const Rot& r2);

}  // namespace sqlfunc
