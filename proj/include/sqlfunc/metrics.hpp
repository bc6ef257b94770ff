#pragma once

#include <cstddef>
#include <vector>

namespace sqlfunc {

struct MetricsReport {
  double auc = 0.0;
  double kendall_tau = 0.0;
  double spearman = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_unparseable = 0;
};

/// AUC by the rank statistic with ties counted 1/2, Spearman as the
/// correlation of average ranks, Kendall tau over untied pairs. All three
/// are computed from exact integer rank/count sums, so results are
/// bit-identical to their brute-force counterparts.
/// Throws DegenerateLabels when labels are all one class.
MetricsReport compute_metrics(const std::vector<double>& scores,
                              const std::vector<int>& labels);

/// Maps the model's raw score in (-inf, 0] onto [0, 1]:
/// y -> max((y + 3) / 3, 0).
double normalize_score(double raw);

}  // namespace sqlfunc
