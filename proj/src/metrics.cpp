#include "sqlfunc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

namespace {

// Average ranks doubled (so ties stay integral): rank2[i] = 2 * avg rank.
std::vector<long long> double_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<long long> rank2(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    // positions i..j (0-based) share average rank ((i+1)+(j+1))/2
    const long long two_avg = static_cast<long long>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = two_avg;
    i = j + 1;
  }
  return rank2;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw Error("scores and labels must have equal length");
  const std::size_t n = scores.size();
  long long pos = 0, neg = 0;
  for (int l : labels) (l > 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0)
    throw DegenerateLabels("need at least one positive and one negative");

  MetricsReport r;
  r.n_scored = n;

  // AUC = (sum of positive ranks - P(P+1)/2) / (P*N), with average ranks.
  std::vector<long long> rank2 = double_ranks(scores);
  long long sum2_pos = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] > 0) sum2_pos += rank2[i];
  r.auc = static_cast<double>(sum2_pos - pos * (pos + 1)) /
          static_cast<double>(2 * pos * neg);

  // Kendall tau over pairs untied in both variables.
  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (labels[i] == labels[j] || scores[i] == scores[j]) continue;
      const bool up = scores[i] < scores[j];
      const bool lab_up = labels[i] < labels[j];
      (up == lab_up ? concordant : discordant) += 1;
    }
  }
  r.kendall_tau =
      concordant + discordant == 0
          ? 0.0
          : static_cast<double>(concordant - discordant) /
                static_cast<double>(concordant + discordant);

  // Spearman: Pearson correlation of the (doubled) average ranks, from
  // exact integer sums.
  std::vector<double> label_vals(labels.begin(), labels.end());
  std::vector<long long> lrank2 = double_ranks(label_vals);
  long long sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long long x = rank2[i], y = lrank2[i];
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const __int128 nn = static_cast<__int128>(n);
  const __int128 num = nn * sxy - static_cast<__int128>(sx) * sy;
  const __int128 dx = nn * sxx - static_cast<__int128>(sx) * sx;
  const __int128 dy = nn * syy - static_cast<__int128>(sy) * sy;
  r.spearman = (dx == 0 || dy == 0)
                   ? 0.0
                   : static_cast<double>(num) /
                         std::sqrt(static_cast<double>(dx) *
                                   static_cast<double>(dy));
  return r;
}

double normalize_score(double raw) {
  return std::max((raw + 3.0) / 3.0, 0.0);
}

}  // namespace sqlfunc
