#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace bsfr {

struct Confusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

Confusion confusion(const Eigen::VectorXi& truth, const Eigen::VectorXi& predicted);

struct BinaryMetrics {
  double mse = 0.0;  // misclassification rate
  double f1 = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Rates from confusion counts. Undefined ratios (no positives, no negatives,
/// or an empty F1 denominator) are reported as 0 and counted in `warnings`.
BinaryMetrics binary_metrics(const Confusion& c, int* warnings = nullptr);

enum class Algorithm { SBLUE, Oracle, KNN };

std::string to_string(Algorithm a);

struct MetricsRow {
  Algorithm algorithm = Algorithm::SBLUE;
  int realizations = 0;
  double mse = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
  // Standard errors of the per-realization values.
  double mse_se = 0.0;
  double f1_se = 0.0;
  double fpr_se = 0.0;
  double tpr_se = 0.0;
};

/// Averages per-realization metrics in the given order.
MetricsRow average_metrics(Algorithm algorithm, const std::vector<BinaryMetrics>& runs);

}  // namespace bsfr
