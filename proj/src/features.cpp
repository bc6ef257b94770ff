#include "sqlfunc/features.hpp"

#include "model_internal.hpp"

namespace sqlfunc {

Mat ascii_onehot(const std::string& s) {
  Mat m(kContentRows, kAsciiDim);
  const std::size_t n = std::min<std::size_t>(s.size(), kContentRows);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c > 127) c = '?';
    m.at(static_cast<int>(i), c) = 1.0;
  }
  return m;
}

std::vector<double> content_encode(const Mat& onehot, const GmnParams& params) {
  Tape tape;
  TapeParams tp = add_params(tape, params, false);
  int x = tape.leaf(onehot, false);
  int row = content_encode_on_tape(tape, tp, params.config, x);
  tape.check_finite(row, "content encoder");
  return tape.val(row).d;
}

std::vector<double> computing_embed(int opcode, const GmnParams& params) {
  if (opcode < 0 || opcode >= kOpcodeSlots) throw OpcodeOutOfRange(opcode);
  const Mat& table = params.at("opcode_table");
  std::vector<double> row(table.cols);
  for (int j = 0; j < table.cols; ++j) row[j] = table.at(opcode, j);
  return row;
}

std::vector<double> edge_embed(EdgeKind kind, const GmnParams& params) {
  const Mat& table = params.at("edge_table");
  const int k = static_cast<int>(kind);
  std::vector<double> row(table.cols);
  for (int j = 0; j < table.cols; ++j) row[j] = table.at(k, j);
  return row;
}

}  // namespace sqlfunc
