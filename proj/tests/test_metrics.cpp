#include <doctest.h>

#include <cmath>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/metrics.hpp"
#include "sqlfunc/tensor.hpp"

using namespace sqlfunc;

namespace {

// O(n^2) references, independent of the rank-based implementation.
double brute_auc(const std::vector<double>& s, const std::vector<int>& l) {
  long long num2 = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (l[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j]) num2 += 2;
      else if (s[i] == s[j]) num2 += 1;
    }
  }
  return static_cast<double>(num2) / static_cast<double>(2 * pairs);
}

double brute_kendall(const std::vector<double>& s, const std::vector<int>& l) {
  long long c = 0, d = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[i] == s[j] || l[i] == l[j]) continue;
      bool agree = (s[i] < s[j]) == (l[i] < l[j]);
      (agree ? c : d) += 1;
    }
  if (c + d == 0) return 0.0;
  return static_cast<double>(c - d) / static_cast<double>(c + d);
}

// average ranks by pairwise counting, doubled to stay integral
std::vector<long long> brute_ranks2(const std::vector<double>& v) {
  std::vector<long long> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    long long less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    out[i] = 2 * less + equal + 1;  // 2 * (less + (equal+1)/2)
  }
  return out;
}

double brute_spearman(const std::vector<double>& s, const std::vector<int>& l) {
  std::vector<long long> x = brute_ranks2(s);
  std::vector<double> lv(l.begin(), l.end());
  std::vector<long long> y = brute_ranks2(lv);
  long long sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const long long n = static_cast<long long>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const __int128 num = static_cast<__int128>(n) * sxy -
                       static_cast<__int128>(sx) * sy;
  const __int128 dx = static_cast<__int128>(n) * sxx -
                      static_cast<__int128>(sx) * sx;
  const __int128 dy = static_cast<__int128>(n) * syy -
                      static_cast<__int128>(sy) * sy;
  if (dx == 0 || dy == 0) return 0.0;
  return static_cast<double>(num) /
         std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

}  // namespace

TEST_CASE("auc examples") {
  MetricsReport perfect =
      compute_metrics({0.9, 0.8, 0.3, 0.1}, {1, 1, 0, 0});
  CHECK(perfect.auc == 1.0);
  MetricsReport mixed = compute_metrics({0.9, 0.2, 0.8, 0.3}, {1, 0, 0, 1});
  CHECK(mixed.auc == 0.75);
  // ties count one half
  MetricsReport tied = compute_metrics({0.5, 0.5}, {1, 0});
  CHECK(tied.auc == 0.5);
}

TEST_CASE("identical rankings give perfect correlation") {
  MetricsReport r = compute_metrics({0.9, 0.9, 0.1, 0.1}, {1, 1, 0, 0});
  CHECK(r.kendall_tau == 1.0);
  CHECK(r.spearman == 1.0);
  MetricsReport inv = compute_metrics({0.1, 0.1, 0.9, 0.9}, {1, 1, 0, 0});
  CHECK(inv.kendall_tau == -1.0);
  CHECK(inv.spearman == -1.0);
}

TEST_CASE("degenerate labels are rejected") {
  CHECK_THROWS_AS(compute_metrics({0.5, 0.2}, {1, 1}), DegenerateLabels);
  CHECK_THROWS_AS(compute_metrics({0.5, 0.2}, {0, 0}), DegenerateLabels);
}

TEST_CASE("implementation equals brute force exactly on random instances") {
  Rng rng(31337);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + rng.below(39);
    std::vector<double> scores;
    std::vector<int> labels;
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      // coarse grid of scores forces plenty of ties
      scores.push_back(rng.below(8) / 7.0);
      labels.push_back(rng.below(2));
      (labels.back() ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    MetricsReport got = compute_metrics(scores, labels);
    CHECK(got.auc == brute_auc(scores, labels));
    CHECK(got.kendall_tau == brute_kendall(scores, labels));
    CHECK(got.spearman == brute_spearman(scores, labels));
    CHECK(got.n_scored == scores.size());
  }
}

TEST_CASE("score normalization formula and clamp") {
  CHECK(normalize_score(-3.0) == 0.0);
  CHECK(normalize_score(0.0) == 1.0);
  CHECK(normalize_score(-4.5) == 0.0);
  CHECK(normalize_score(-1.5) == doctest::Approx(0.5).epsilon(1e-12));
  // monotone non-decreasing over a sweep
  double prev = -1.0;
  for (double raw = -10.0; raw <= 0.0; raw += 0.25) {
    double y = normalize_score(raw);
    CHECK(y >= prev);
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
    prev = y;
  }
}
