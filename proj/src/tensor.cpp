#include "sqlfunc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace sqlfunc {

bool Mat::all_finite() const {
  for (double v : d) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::uint64_t Rng::next_u64() {
  // splitmix64; chosen for identical streams on every platform.
  s_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::u01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

int Rng::below(int n) {
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

int conv1d_out_len(int in_len, int ksize, int stride, int pad) {
  return (in_len + 2 * pad - ksize) / stride + 1;
}

int Tape::push(Mat val, bool rg, std::function<void()> back) {
  nodes_.push_back(Node{std::move(val), Mat(), rg, std::move(back)});
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Mat value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

int Tape::matmul(int a, int b) {
  const Mat& A = nodes_[a].val;
  const Mat& B = nodes_[b].val;
  if (A.cols != B.rows) throw ShapeMismatch("matmul");
  Mat out(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int k = 0; k < A.cols; ++k) {
      const double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) out.at(i, j) += aik * B.at(k, j);
    }
  }
  bool rg = nodes_[a].rg || nodes_[b].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, b, id]() {
      const Mat& G = nodes_[id].grad;
      const Mat& A2 = nodes_[a].val;
      const Mat& B2 = nodes_[b].val;
      if (nodes_[a].rg) {
        Mat& GA = nodes_[a].grad;
        for (int i = 0; i < A2.rows; ++i)
          for (int j = 0; j < B2.cols; ++j) {
            const double g = G.at(i, j);
            if (g == 0.0) continue;
            for (int k = 0; k < A2.cols; ++k) GA.at(i, k) += g * B2.at(k, j);
          }
      }
      if (nodes_[b].rg) {
        Mat& GB = nodes_[b].grad;
        for (int i = 0; i < A2.rows; ++i)
          for (int k = 0; k < A2.cols; ++k) {
            const double av = A2.at(i, k);
            if (av == 0.0) continue;
            for (int j = 0; j < B2.cols; ++j) GB.at(k, j) += av * G.at(i, j);
          }
      }
    };
  }
  return id;
}

int Tape::transpose(int a) {
  const Mat& A = nodes_[a].val;
  Mat out(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) out.at(j, i) = A.at(i, j);
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, id]() {
      const Mat& G = nodes_[id].grad;
      Mat& GA = nodes_[a].grad;
      for (int i = 0; i < G.rows; ++i)
        for (int j = 0; j < G.cols; ++j) GA.at(j, i) += G.at(i, j);
    };
  }
  return id;
}

int Tape::add(int a, int b) {
  const Mat& A = nodes_[a].val;
  const Mat& B = nodes_[b].val;
  if (!A.same_shape(B)) throw ShapeMismatch("add");
  Mat out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.d[i] += B.d[i];
  bool rg = nodes_[a].rg || nodes_[b].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, b, id]() {
      const Mat& G = nodes_[id].grad;
      if (nodes_[a].rg)
        for (std::size_t i = 0; i < G.size(); ++i) nodes_[a].grad.d[i] += G.d[i];
      if (nodes_[b].rg)
        for (std::size_t i = 0; i < G.size(); ++i) nodes_[b].grad.d[i] += G.d[i];
    };
  }
  return id;
}

int Tape::sub(int a, int b) {
  const Mat& A = nodes_[a].val;
  const Mat& B = nodes_[b].val;
  if (!A.same_shape(B)) throw ShapeMismatch("sub");
  Mat out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.d[i] -= B.d[i];
  bool rg = nodes_[a].rg || nodes_[b].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, b, id]() {
      const Mat& G = nodes_[id].grad;
      if (nodes_[a].rg)
        for (std::size_t i = 0; i < G.size(); ++i) nodes_[a].grad.d[i] += G.d[i];
      if (nodes_[b].rg)
        for (std::size_t i = 0; i < G.size(); ++i) nodes_[b].grad.d[i] -= G.d[i];
    };
  }
  return id;
}

int Tape::hadamard(int a, int b) {
  const Mat& A = nodes_[a].val;
  const Mat& B = nodes_[b].val;
  if (!A.same_shape(B)) throw ShapeMismatch("hadamard");
  Mat out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.d[i] *= B.d[i];
  bool rg = nodes_[a].rg || nodes_[b].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, b, id]() {
      const Mat& G = nodes_[id].grad;
      const Mat& A2 = nodes_[a].val;
      const Mat& B2 = nodes_[b].val;
      if (nodes_[a].rg)
        for (std::size_t i = 0; i < G.size(); ++i)
          nodes_[a].grad.d[i] += G.d[i] * B2.d[i];
      if (nodes_[b].rg)
        for (std::size_t i = 0; i < G.size(); ++i)
          nodes_[b].grad.d[i] += G.d[i] * A2.d[i];
    };
  }
  return id;
}

int Tape::add_rowvec(int a, int bias) {
  const Mat& A = nodes_[a].val;
  const Mat& B = nodes_[bias].val;
  if (B.rows != 1 || B.cols != A.cols) throw ShapeMismatch("add_rowvec");
  Mat out = A;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) out.at(i, j) += B.at(0, j);
  bool rg = nodes_[a].rg || nodes_[bias].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, bias, id]() {
      const Mat& G = nodes_[id].grad;
      if (nodes_[a].rg)
        for (std::size_t i = 0; i < G.size(); ++i) nodes_[a].grad.d[i] += G.d[i];
      if (nodes_[bias].rg) {
        Mat& GB = nodes_[bias].grad;
        for (int i = 0; i < G.rows; ++i)
          for (int j = 0; j < G.cols; ++j) GB.at(0, j) += G.at(i, j);
      }
    };
  }
  return id;
}

int Tape::affine(int a, double alpha, double beta) {
  Mat out = nodes_[a].val;
  for (double& v : out.d) v = alpha * v + beta;
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, alpha, id]() {
      const Mat& G = nodes_[id].grad;
      for (std::size_t i = 0; i < G.size(); ++i)
        nodes_[a].grad.d[i] += alpha * G.d[i];
    };
  }
  return id;
}

int Tape::relu(int a) {
  Mat out = nodes_[a].val;
  for (double& v : out.d) v = v > 0.0 ? v : 0.0;
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, id]() {
      const Mat& G = nodes_[id].grad;
      const Mat& A = nodes_[a].val;
      for (std::size_t i = 0; i < G.size(); ++i)
        if (A.d[i] > 0.0) nodes_[a].grad.d[i] += G.d[i];
    };
  }
  return id;
}

int Tape::tanh_op(int a) {
  Mat out = nodes_[a].val;
  for (double& v : out.d) v = std::tanh(v);
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, id]() {
      const Mat& G = nodes_[id].grad;
      const Mat& Y = nodes_[id].val;
      for (std::size_t i = 0; i < G.size(); ++i)
        nodes_[a].grad.d[i] += G.d[i] * (1.0 - Y.d[i] * Y.d[i]);
    };
  }
  return id;
}

int Tape::sigmoid(int a) {
  Mat out = nodes_[a].val;
  for (double& v : out.d) v = 1.0 / (1.0 + std::exp(-v));
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, id]() {
      const Mat& G = nodes_[id].grad;
      const Mat& Y = nodes_[id].val;
      for (std::size_t i = 0; i < G.size(); ++i)
        nodes_[a].grad.d[i] += G.d[i] * Y.d[i] * (1.0 - Y.d[i]);
    };
  }
  return id;
}

int Tape::softmax_rows(int a) {
  const Mat& A = nodes_[a].val;
  Mat out(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i) {
    double mx = A.at(i, 0);
    for (int j = 1; j < A.cols; ++j) mx = std::max(mx, A.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < A.cols; ++j) {
      out.at(i, j) = std::exp(A.at(i, j) - mx);
      sum += out.at(i, j);
    }
    for (int j = 0; j < A.cols; ++j) out.at(i, j) /= sum;
  }
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, id]() {
      const Mat& G = nodes_[id].grad;
      const Mat& Y = nodes_[id].val;
      Mat& GA = nodes_[a].grad;
      for (int i = 0; i < G.rows; ++i) {
        double dot = 0.0;
        for (int j = 0; j < G.cols; ++j) dot += G.at(i, j) * Y.at(i, j);
        for (int j = 0; j < G.cols; ++j)
          GA.at(i, j) += Y.at(i, j) * (G.at(i, j) - dot);
      }
    };
  }
  return id;
}

int Tape::concat_cols(int a, int b) {
  const Mat& A = nodes_[a].val;
  const Mat& B = nodes_[b].val;
  if (A.rows != B.rows) throw ShapeMismatch("concat_cols");
  Mat out(A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j);
    for (int j = 0; j < B.cols; ++j) out.at(i, A.cols + j) = B.at(i, j);
  }
  bool rg = nodes_[a].rg || nodes_[b].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, b, id]() {
      const Mat& G = nodes_[id].grad;
      const int ac = nodes_[a].val.cols;
      if (nodes_[a].rg) {
        Mat& GA = nodes_[a].grad;
        for (int i = 0; i < GA.rows; ++i)
          for (int j = 0; j < GA.cols; ++j) GA.at(i, j) += G.at(i, j);
      }
      if (nodes_[b].rg) {
        Mat& GB = nodes_[b].grad;
        for (int i = 0; i < GB.rows; ++i)
          for (int j = 0; j < GB.cols; ++j) GB.at(i, j) += G.at(i, ac + j);
      }
    };
  }
  return id;
}

int Tape::concat_rows(const std::vector<int>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_rows: empty");
  int cols = nodes_[parts[0]].val.cols;
  int rows = 0;
  bool rg = false;
  for (int p : parts) {
    if (nodes_[p].val.cols != cols) throw ShapeMismatch("concat_rows");
    rows += nodes_[p].val.rows;
    rg = rg || nodes_[p].rg;
  }
  Mat out(rows, cols);
  int r = 0;
  for (int p : parts) {
    const Mat& P = nodes_[p].val;
    for (int i = 0; i < P.rows; ++i)
      for (int j = 0; j < cols; ++j) out.at(r + i, j) = P.at(i, j);
    r += P.rows;
  }
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    std::vector<int> ps = parts;
    nodes_[id].back = [this, ps, id]() {
      const Mat& G = nodes_[id].grad;
      int r2 = 0;
      for (int p : ps) {
        const int pr = nodes_[p].val.rows;
        if (nodes_[p].rg) {
          Mat& GP = nodes_[p].grad;
          for (int i = 0; i < pr; ++i)
            for (int j = 0; j < G.cols; ++j) GP.at(i, j) += G.at(r2 + i, j);
        }
        r2 += pr;
      }
    };
  }
  return id;
}

int Tape::gather_rows(int a, std::vector<int> rows) {
  const Mat& A = nodes_[a].val;
  Mat out(static_cast<int>(rows.size()), A.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < A.cols; ++j)
      out.at(static_cast<int>(i), j) = A.at(rows[i], j);
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, rows = std::move(rows), id]() {
      const Mat& G = nodes_[id].grad;
      Mat& GA = nodes_[a].grad;
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < G.cols; ++j)
          GA.at(rows[i], j) += G.at(static_cast<int>(i), j);
    };
  }
  return id;
}

int Tape::scatter_rows(int a, std::vector<int> rows, int out_rows) {
  const Mat& A = nodes_[a].val;
  if (static_cast<int>(rows.size()) != A.rows)
    throw ShapeMismatch("scatter_rows");
  Mat out(out_rows, A.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < A.cols; ++j)
      out.at(rows[i], j) = A.at(static_cast<int>(i), j);
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, rows = std::move(rows), id]() {
      const Mat& G = nodes_[id].grad;
      Mat& GA = nodes_[a].grad;
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < G.cols; ++j)
          GA.at(static_cast<int>(i), j) += G.at(rows[i], j);
    };
  }
  return id;
}

int Tape::mean_rows(int a) {
  const Mat& A = nodes_[a].val;
  Mat out(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) out.at(0, j) += A.at(i, j);
  for (int j = 0; j < A.cols; ++j) out.at(0, j) /= A.rows;
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, id]() {
      const Mat& G = nodes_[id].grad;
      Mat& GA = nodes_[a].grad;
      const double inv = 1.0 / GA.rows;
      for (int i = 0; i < GA.rows; ++i)
        for (int j = 0; j < GA.cols; ++j) GA.at(i, j) += inv * G.at(0, j);
    };
  }
  return id;
}

int Tape::sum_rows(int a) {
  const Mat& A = nodes_[a].val;
  Mat out(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) out.at(0, j) += A.at(i, j);
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, id]() {
      const Mat& G = nodes_[id].grad;
      Mat& GA = nodes_[a].grad;
      for (int i = 0; i < GA.rows; ++i)
        for (int j = 0; j < GA.cols; ++j) GA.at(i, j) += G.at(0, j);
    };
  }
  return id;
}

int Tape::norm2(int a) {
  const Mat& A = nodes_[a].val;
  double s = 0.0;
  for (double v : A.d) s += v * v;
  Mat out(1, 1);
  out.at(0, 0) = std::sqrt(s);
  bool rg = nodes_[a].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, a, id]() {
      const double n = nodes_[id].val.at(0, 0);
      if (n == 0.0) return;  // subgradient 0 at the origin
      const double g = nodes_[id].grad.at(0, 0) / n;
      const Mat& A2 = nodes_[a].val;
      for (std::size_t i = 0; i < A2.size(); ++i)
        nodes_[a].grad.d[i] += g * A2.d[i];
    };
  }
  return id;
}

int Tape::conv1d(int x, int w, int b, int ksize, int stride, int pad) {
  const Mat& X = nodes_[x].val;  // L x Cin
  const Mat& W = nodes_[w].val;  // Cout x (ksize*Cin)
  const Mat& B = nodes_[b].val;  // 1 x Cout
  const int cin = X.cols;
  const int cout = W.rows;
  if (W.cols != ksize * cin || B.cols != cout || B.rows != 1)
    throw ShapeMismatch("conv1d");
  const int lout = conv1d_out_len(X.rows, ksize, stride, pad);
  Mat out(lout, cout);
  for (int t = 0; t < lout; ++t) {
    for (int co = 0; co < cout; ++co) {
      double acc = B.at(0, co);
      for (int k = 0; k < ksize; ++k) {
        const int src = t * stride + k - pad;
        if (src < 0 || src >= X.rows) continue;
        for (int ci = 0; ci < cin; ++ci)
          acc += W.at(co, k * cin + ci) * X.at(src, ci);
      }
      out.at(t, co) = acc;
    }
  }
  bool rg = nodes_[x].rg || nodes_[w].rg || nodes_[b].rg;
  int id = push(std::move(out), rg, nullptr);
  if (rg) {
    nodes_[id].back = [this, x, w, b, ksize, stride, pad, id]() {
      const Mat& G = nodes_[id].grad;
      const Mat& X2 = nodes_[x].val;
      const Mat& W2 = nodes_[w].val;
      const int cin = X2.cols;
      for (int t = 0; t < G.rows; ++t) {
        for (int co = 0; co < G.cols; ++co) {
          const double g = G.at(t, co);
          if (g == 0.0) continue;
          if (nodes_[b].rg) nodes_[b].grad.at(0, co) += g;
          for (int k = 0; k < ksize; ++k) {
            const int src = t * stride + k - pad;
            if (src < 0 || src >= X2.rows) continue;
            for (int ci = 0; ci < cin; ++ci) {
              if (nodes_[w].rg)
                nodes_[w].grad.at(co, k * cin + ci) += g * X2.at(src, ci);
              if (nodes_[x].rg)
                nodes_[x].grad.at(src, ci) += g * W2.at(co, k * cin + ci);
            }
          }
        }
      }
    };
  }
  return id;
}

void Tape::backward(int loss_id) {
  const Mat& L = nodes_[loss_id].val;
  if (L.rows != 1 || L.cols != 1)
    throw ShapeMismatch("backward expects a scalar");
  for (Node& n : nodes_) {
    if (n.rg) {
      n.grad = Mat(n.val.rows, n.val.cols);
    }
  }
  if (!nodes_[loss_id].rg) return;
  nodes_[loss_id].grad.at(0, 0) = 1.0;
  for (int i = loss_id; i >= 0; --i) {
    if (nodes_[i].rg && nodes_[i].back) nodes_[i].back();
  }
}

void Tape::check_finite(int id, const std::string& where) const {
  if (!nodes_[id].val.all_finite()) throw NonFiniteActivation(where);
}

}  // namespace sqlfunc
