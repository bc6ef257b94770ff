#pragma once

#include <utility>

#include "sqlfunc/graph.hpp"
#include "sqlfunc/tensor.hpp"

namespace sqlfunc {

enum class PeMode { Separate, Global };

struct PeConfig {
  int K = 16;
  PeMode mode = PeMode::Global;
};

/// Row-stochastic random-walk transition matrix T = D^-1 A over the
/// undirected graph obtained by symmetrizing all edges and collapsing
/// parallel edges, with zero diagonal. Rows of isolated nodes are zero.
Mat transition_matrix(const ProgramGraph& g);

/// Return-probability encoding: row i holds diag(T^k) for k = 1..K.
Mat rwpe_encode(const ProgramGraph& g, int K);

/// RWPE on the merged graph, with RelsLink and SeedLinks as ordinary edges,
/// split back into the two graphs' rows.
std::pair<Mat, Mat> global_rwpe_encode(const MergedGraph& m, int K);

/// Diagonal powers of an explicit symmetric adjacency; shared kernel.
Mat rwpe_from_adjacency(const std::vector<std::vector<int>>& adj, int K);

}  // namespace sqlfunc
