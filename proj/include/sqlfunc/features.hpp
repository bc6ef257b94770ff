#pragma once

#include <string>
#include <vector>

#include "sqlfunc/gmn.hpp"

namespace sqlfunc {

inline constexpr int kContentRows = 64;   // fixed string length
inline constexpr int kAsciiDim = 128;     // one-hot alphabet size

/// 64 x 128 one-hot matrix of the string's ASCII codes. Characters past
/// index 63 are truncated; non-ASCII bytes map to '?'; unused rows stay
/// zero.
Mat ascii_onehot(const std::string& s);

/// Residual 1-D convolution encoder over the one-hot matrix, to a d_h row.
/// Throws NonFiniteActivation on NaN/Inf intermediates.
std::vector<double> content_encode(const Mat& onehot, const GmnParams& params);

/// Row `opcode` of the opcode embedding table. Throws OpcodeOutOfRange.
std::vector<double> computing_embed(int opcode, const GmnParams& params);

/// Row lookup in the 3-entry edge-kind table.
std::vector<double> edge_embed(EdgeKind kind, const GmnParams& params);

}  // namespace sqlfunc
