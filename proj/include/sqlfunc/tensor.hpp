#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

/// Dense row-major matrix of doubles. Vectors are 1 x n or n x 1 matrices.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return d[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return d[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return d.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
};

/// Deterministic RNG with a platform-independent [0,1) mapping.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next_u64();
  double u01();                       // uniform [0, 1)
  double uniform(double lo, double hi);
  int below(int n);                   // uniform integer in [0, n)

 private:
  std::uint64_t s_;
};

/// Reverse-mode autodiff tape over Mat values.
///
/// Usage: create leaves (parameters and constants), compose ops, call
/// backward() on a 1x1 result, then read grad() of any leaf that requires
/// gradients. The tape owns all intermediate values.
class Tape {
 public:
  int leaf(Mat value, bool requires_grad);

  int matmul(int a, int b);
  int transpose(int a);
  int add(int a, int b);            // same shape
  int sub(int a, int b);            // same shape
  int hadamard(int a, int b);       // elementwise product, same shape
  int add_rowvec(int a, int bias);  // bias is 1 x cols, broadcast over rows
  int affine(int a, double alpha, double beta);  // alpha * a + beta
  int relu(int a);
  int tanh_op(int a);
  int sigmoid(int a);
  int softmax_rows(int a);
  int concat_cols(int a, int b);
  int concat_rows(const std::vector<int>& parts);
  int gather_rows(int a, std::vector<int> rows);
  // Places row i of `a` at row rows[i] of an out_rows x cols result.
  // Row indices must be distinct.
  int scatter_rows(int a, std::vector<int> rows, int out_rows);
  int mean_rows(int a);  // 1 x cols
  int sum_rows(int a);   // 1 x cols
  int norm2(int a);      // 1x1 Frobenius/L2 norm; gradient 0 at the origin
  // 1-D convolution. x: L x Cin, w: Cout x (ksize*Cin) with kernel-major
  // layout w[co][k*Cin + ci], b: 1 x Cout. Zero padding `pad` on both ends.
  int conv1d(int x, int w, int b, int ksize, int stride, int pad);

  const Mat& val(int id) const { return nodes_[id].val; }
  const Mat& grad(int id) const { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].rg; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates to all leaves.
  void backward(int loss_id);

  /// Throws NonFiniteActivation if the node value contains NaN/Inf.
  void check_finite(int id, const std::string& where) const;

 private:
  struct Node {
    Mat val;
    Mat grad;
    bool rg = false;
    std::function<void()> back;  // empty for leaves
  };
  int push(Mat val, bool rg, std::function<void()> back);
  std::vector<Node> nodes_;
};

int conv1d_out_len(int in_len, int ksize, int stride, int pad);

}  // namespace sqlfunc
