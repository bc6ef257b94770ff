#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqlfunc/graph.hpp"
#include "sqlfunc/rwpe.hpp"
#include "sqlfunc/tensor.hpp"

namespace sqlfunc {

struct ModelConfig {
  int d_h = 128;  // node state size
  int d_e = 32;   // edge embedding size
  int K = 16;     // walk length == positional dimension
  int T = 5;      // propagation steps
  double gamma = 0.5;
  std::uint64_t seed = 1;
  std::array<int, 4> content_channels{128, 128, 256, 256};
  int content_blocks_per_stage = 2;  // eight residual blocks over four stages
  int content_kernel = 3;
  PeMode pe_mode = PeMode::Global;
  FlowSet flows{};

  void validate() const;  // throws Error on nonsensical values
};

/// All learnable tensors, keyed by checkpoint name. Weight matrices map
/// row vectors by right-multiplication: y = x * W + b.
struct GmnParams {
  ModelConfig config;
  std::map<std::string, Mat> tensors;

  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;

  /// Fresh parameters, uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from the
  /// config seed, in a fixed tensor order.
  static GmnParams init(const ModelConfig& cfg);
};

struct PairState {
  Mat H1, P1, H2, P2;
  std::vector<Mat> att12, att21;  // one entry per completed step
};

struct CrossAttention {
  Mat mu1, mu2, a12, a21;
};

struct PairScore {
  double distance = 0.0;   // s = ||h_G1 - h_G2||
  double raw_score = 0.0;  // -s, in (-inf, 0]
  std::vector<Mat> att12, att21;
};

/// H0/P0 for one graph: opcode-table rows for computing nodes, content
/// encodings for content leaves, pe as the positional state.
std::pair<Mat, Mat> init_states(const ProgramGraph& g, const Mat& pe,
                                const GmnParams& params);

CrossAttention cross_attention(const Mat& H1, const Mat& P1, const Mat& H2,
                               const Mat& P2, const GmnParams& params);

PairState propagate_step(const PairState& state, const ProgramGraph& g1,
                         const ProgramGraph& g2, const GmnParams& params);

Mat aggregate_graph(const Mat& H, const GmnParams& params);

/// Full scoring pipeline over a merged pair: positional encodings per
/// config.pe_mode, T propagation steps, gated aggregation, Euclidean
/// distance.
PairScore pair_score(const MergedGraph& pair, const GmnParams& params);

double margin_loss(double distance, int label, double gamma);

/// Forward + reverse pass for one pair; gradient of the margin loss with
/// respect to every tensor.
struct PairGradients {
  double distance = 0.0;
  double loss = 0.0;
  std::map<std::string, Mat> grads;
};
PairGradients pair_loss_gradients(const MergedGraph& pair,
                                  const GmnParams& params, int label,
                                  double gamma);

/// Compares analytic gradients against central finite differences.
/// Relative error uses the tensor's gradient scale with a small floor.
/// Throws GradMismatch if any tensor exceeds `tolerance`.
struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_tensor;
  std::map<std::string, double> per_tensor;
};
GradCheckReport grad_check(const GmnParams& params, const MergedGraph& pair,
                           int label, double gamma, double eps,
                           double tolerance = 1e-4);

// -- checkpoint io (binary container, see docs/formats.md) -----------------

void save_checkpoint(const GmnParams& params, const std::string& path);
GmnParams load_checkpoint(const std::string& path);

}  // namespace sqlfunc
