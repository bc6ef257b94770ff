#include <doctest.h>

#include <cmath>
#include <functional>

#include "sqlfunc/tensor.hpp"

using namespace sqlfunc;

namespace {

Mat random_mat(Rng& rng, int r, int c) {
  Mat m(r, c);
  for (double& v : m.d) v = rng.uniform(-1.0, 1.0);
  return m;
}

// Finite-difference check of d(sum of `weights * out`)/d(leaf) for a
// single-op graph built by `build`.
void fd_check(Rng& rng, const std::vector<Mat>& inputs,
              const std::function<int(Tape&, const std::vector<int>&)>& build,
              double tol = 1e-6) {
  Tape tape;
  std::vector<int> leaves;
  for (const Mat& m : inputs) leaves.push_back(tape.leaf(m, true));
  int out = build(tape, leaves);
  // random linear functional turns the op output into a scalar
  Mat w = random_mat(rng, tape.val(out).rows, tape.val(out).cols);
  int wid = tape.leaf(w, false);
  int scalar = tape.norm2(tape.hadamard(out, wid));
  tape.backward(scalar);

  const double eps = 1e-6;
  for (std::size_t li = 0; li < inputs.size(); ++li) {
    for (std::size_t i = 0; i < inputs[li].size(); ++i) {
      auto eval = [&](double delta) {
        Tape t2;
        std::vector<int> l2;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          Mat m = inputs[k];
          if (k == li) m.d[i] += delta;
          l2.push_back(t2.leaf(m, false));
        }
        int o2 = build(t2, l2);
        int w2 = t2.leaf(w, false);
        return t2.val(t2.norm2(t2.hadamard(o2, w2))).at(0, 0);
      };
      const double fd = (eval(eps) - eval(-eps)) / (2 * eps);
      const double an = tape.grad(leaves[li]).d[i];
      CHECK(std::fabs(fd - an) <=
            tol * std::max({1.0, std::fabs(fd), std::fabs(an)}));
    }
  }
}

}  // namespace

TEST_CASE("rng is deterministic and uniform in [0,1)") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    double x = a.u01();
    CHECK(x == b.u01());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("matmul forward") {
  Tape t;
  Mat a(2, 3), b(3, 2);
  for (int i = 0; i < 6; ++i) a.d[i] = i + 1;      // [[1,2,3],[4,5,6]]
  for (int i = 0; i < 6; ++i) b.d[i] = (i % 2) ? 1 : 2;  // [[2,1],[2,1],[2,1]]
  int c = t.matmul(t.leaf(a, false), t.leaf(b, false));
  CHECK(t.val(c).at(0, 0) == doctest::Approx(12));
  CHECK(t.val(c).at(0, 1) == doctest::Approx(6));
  CHECK(t.val(c).at(1, 0) == doctest::Approx(30));
  CHECK(t.val(c).at(1, 1) == doctest::Approx(15));
}

TEST_CASE("gradients agree with finite differences for every op") {
  Rng rng(7);
  fd_check(rng, {random_mat(rng, 3, 4), random_mat(rng, 4, 2)},
           [](Tape& t, const std::vector<int>& l) {
             return t.matmul(l[0], l[1]);
           });
  fd_check(rng, {random_mat(rng, 3, 3), random_mat(rng, 3, 3)},
           [](Tape& t, const std::vector<int>& l) {
             return t.hadamard(t.add(l[0], l[1]), t.sub(l[0], l[1]));
           });
  fd_check(rng, {random_mat(rng, 4, 3)},
           [](Tape& t, const std::vector<int>& l) {
             return t.tanh_op(t.relu(l[0]));
           });
  fd_check(rng, {random_mat(rng, 4, 3)},
           [](Tape& t, const std::vector<int>& l) {
             return t.sigmoid(t.affine(l[0], 1.7, -0.3));
           });
  fd_check(rng, {random_mat(rng, 3, 5)},
           [](Tape& t, const std::vector<int>& l) {
             return t.softmax_rows(l[0]);
           });
  fd_check(rng, {random_mat(rng, 2, 3), random_mat(rng, 1, 3)},
           [](Tape& t, const std::vector<int>& l) {
             return t.add_rowvec(l[0], l[1]);
           });
  fd_check(rng, {random_mat(rng, 3, 4)},
           [](Tape& t, const std::vector<int>& l) {
             return t.transpose(l[0]);
           });
  fd_check(rng, {random_mat(rng, 2, 3), random_mat(rng, 2, 2)},
           [](Tape& t, const std::vector<int>& l) {
             return t.concat_cols(l[0], l[1]);
           });
  fd_check(rng, {random_mat(rng, 2, 3), random_mat(rng, 3, 3)},
           [](Tape& t, const std::vector<int>& l) {
             return t.concat_rows({l[0], l[1]});
           });
  fd_check(rng, {random_mat(rng, 4, 3)},
           [](Tape& t, const std::vector<int>& l) {
             return t.gather_rows(l[0], {2, 0, 2, 3});
           });
  fd_check(rng, {random_mat(rng, 3, 2)},
           [](Tape& t, const std::vector<int>& l) {
             return t.scatter_rows(l[0], {4, 1, 2}, 6);
           });
  fd_check(rng, {random_mat(rng, 5, 3)},
           [](Tape& t, const std::vector<int>& l) { return t.mean_rows(l[0]); });
  fd_check(rng, {random_mat(rng, 5, 3)},
           [](Tape& t, const std::vector<int>& l) { return t.sum_rows(l[0]); });
  // conv1d: stride 1 and stride 2, with padding
  fd_check(rng,
           {random_mat(rng, 8, 3), random_mat(rng, 4, 9), random_mat(rng, 1, 4)},
           [](Tape& t, const std::vector<int>& l) {
             return t.conv1d(l[0], l[1], l[2], 3, 1, 1);
           });
  fd_check(rng,
           {random_mat(rng, 8, 3), random_mat(rng, 4, 9), random_mat(rng, 1, 4)},
           [](Tape& t, const std::vector<int>& l) {
             return t.conv1d(l[0], l[1], l[2], 3, 2, 1);
           });
  fd_check(rng, {random_mat(rng, 8, 3), random_mat(rng, 4, 3), random_mat(rng, 1, 4)},
           [](Tape& t, const std::vector<int>& l) {
             return t.conv1d(l[0], l[1], l[2], 1, 2, 0);
           });
}

TEST_CASE("norm2 gradient and the zero-point convention") {
  Rng rng(11);
  Mat a = random_mat(rng, 3, 3);
  Tape t;
  int l = t.leaf(a, true);
  int n = t.norm2(l);
  t.backward(n);
  double norm = t.val(n).at(0, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(t.grad(l).d[i] == doctest::Approx(a.d[i] / norm));

  Tape t0;
  int z = t0.leaf(Mat(2, 2), true);
  int n0 = t0.norm2(z);
  t0.backward(n0);
  for (double g : t0.grad(z).d) CHECK(g == 0.0);
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(3);
  Mat a = random_mat(rng, 6, 7);
  Tape t;
  int s = t.softmax_rows(t.leaf(a, false));
  for (int i = 0; i < 6; ++i) {
    double sum = 0;
    for (int j = 0; j < 7; ++j) sum += t.val(s).at(i, j);
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }
}
