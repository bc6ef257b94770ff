#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sqlfunc/rot.hpp"
#include "sqlfunc/tensor.hpp"

namespace sqlfunc {

enum class EdgeKind : int { Syntax = 0, LogicFlow = 1, DataFlow = 2 };

struct GraphNode {
  int id = 0;
  bool computing = false;
  Opcode opcode = Opcode::Rels;  // computing nodes
  std::string label;             // content text, or opcode name
  int depth = 0;                 // Rels root = 0, layer-2 roots = 1
};

struct GraphEdge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::Syntax;
};

struct FlowSet {
  bool logic = true;
  bool data = true;
};

/// Program graph of one query: the operator tree's nodes with syntax edges
/// mirroring the tree, logic-flow edges chaining the layer-2 operators in
/// execution order, and data-flow edges chaining occurrences of the same
/// resolved column. Node ids are preorder positions in the Rot.
struct ProgramGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<int> layer2;  // ids of layer-2 operator roots, document order

  bool is_layer2_root(int id) const;
};

enum class LinkKind { RelsLink, SeedLink };

struct CrossLink {
  int left = 0;
  int right = 0;
  LinkKind kind = LinkKind::RelsLink;
};

struct MergedGraph {
  ProgramGraph left;
  ProgramGraph right;
  std::vector<CrossLink> cross_links;
};

ProgramGraph build_program_graph(const Rot& rot, FlowSet flows = {});

/// Seeds come from find_seed_pairs; endpoints must be layer-2 roots.
/// Throws InvalidSeed otherwise.
MergedGraph merge_graph_pair(const ProgramGraph& g1, const ProgramGraph& g2,
                             const std::vector<std::pair<int, int>>& seeds);

bool graph_eq(const ProgramGraph& a, const ProgramGraph& b);

/// Deterministic exports: nodes in id order, edges sorted (src, dst, kind).
/// The optional attention matrix must be |V1| x |V2| row-stochastic;
/// throws ShapeMismatch otherwise.
std::string export_graph_dot(const ProgramGraph& g);
std::string export_graph_json(const ProgramGraph& g, int indent = -1);
std::string export_merged_dot(const MergedGraph& m, const Mat* attention = nullptr);
std::string export_merged_json(const MergedGraph& m,
                               const Mat* attention = nullptr, int indent = -1);

ProgramGraph graph_from_json(const std::string& text);
MergedGraph merged_from_json(const std::string& text);

}  // namespace sqlfunc
