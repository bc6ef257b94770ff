#pragma once

#include <map>
#include <string>
#include <vector>

#include "sqlfunc/gmn.hpp"
#include "sqlfunc/tensor.hpp"

namespace sqlfunc {

/// Tape leaf ids of every parameter tensor.
struct TapeParams {
  std::map<std::string, int> leaf;
  int get(const std::string& name) const;
};

TapeParams add_params(Tape& tape, const GmnParams& params, bool requires_grad);

/// Content encoder pipeline on an existing tape; returns a 1 x d_h node.
int content_encode_on_tape(Tape& tape, const TapeParams& tp,
                           const ModelConfig& cfg, int onehot_leaf);

/// y = relu(x W0 + b0) W1 + b1
int mlp2_on_tape(Tape& tape, const TapeParams& tp, const std::string& prefix,
                 int x);

/// Fixed per-graph structures for message passing.
struct GraphWiring {
  std::vector<int> comp_ids, comp_opcodes;
  std::vector<int> cont_ids;
  std::vector<std::string> cont_texts;
  std::vector<int> msg_tgt, msg_src, msg_kind;  // directed edge expansion
  Mat scatter;        // n x E, sums per-edge messages into targets
  Mat adjacency;      // n x n symmetric 0/1, parallel edges collapsed
  int n = 0;
};
GraphWiring wire_graph(const ProgramGraph& g);

/// Initial H0 for one graph (content encodes cached per text).
int initial_states_on_tape(Tape& tape, const TapeParams& tp,
                           const ModelConfig& cfg, const GraphWiring& w,
                           std::map<std::string, int>& content_cache);

struct StepNodes {
  int h1, h2, p1, p2;
  int a12 = -1, a21 = -1;
};

/// One propagation step over both graphs.
StepNodes propagate_on_tape(Tape& tape, const TapeParams& tp,
                            const ModelConfig& cfg, const GraphWiring& w1,
                            const GraphWiring& w2, const StepNodes& in);

int aggregate_on_tape(Tape& tape, const TapeParams& tp, int h);

/// Positional encodings for the pair per config.pe_mode.
std::pair<Mat, Mat> pair_positional(const MergedGraph& pair,
                                    const ModelConfig& cfg);

/// Builds the full forward pass; returns the distance node id and records
/// attention node ids per step.
struct ForwardNodes {
  int distance = -1;
  int h_g1 = -1, h_g2 = -1;
  std::vector<int> att12, att21;
};
ForwardNodes build_pair_forward(Tape& tape, const TapeParams& tp,
                                const MergedGraph& pair,
                                const GmnParams& params);

/// Same, with the positional encodings precomputed (training caches them).
ForwardNodes build_pair_forward_pe(Tape& tape, const TapeParams& tp,
                                   const MergedGraph& pair,
                                   const GmnParams& params, const Mat& pe1,
                                   const Mat& pe2);

}  // namespace sqlfunc
