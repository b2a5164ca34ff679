#include "bsfr/metrics.hpp"

#include <cmath>

#include "bsfr/errors.hpp"

namespace bsfr {

Confusion confusion(const Eigen::VectorXi& truth, const Eigen::VectorXi& predicted) {
  if (truth.size() != predicted.size()) throw DomainError("confusion: length mismatch");
  Confusion c;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const bool t = truth(i) != 0;
    const bool p = predicted(i) != 0;
    if (t && p) {
      ++c.tp;
    } else if (!t && p) {
      ++c.fp;
    } else if (!t && !p) {
      ++c.tn;
    } else {
      ++c.fn;
    }
  }
  return c;
}

BinaryMetrics binary_metrics(const Confusion& c, int* warnings) {
  auto ratio = [&](double num, double den) {
    if (den == 0.0) {
      if (warnings) ++*warnings;
      return 0.0;
    }
    return num / den;
  };
  BinaryMetrics m;
  m.mse = ratio(static_cast<double>(c.fp + c.fn), static_cast<double>(c.total()));
  m.f1 = ratio(2.0 * c.tp, static_cast<double>(2 * c.tp + c.fp + c.fn));
  m.fpr = ratio(static_cast<double>(c.fp), static_cast<double>(c.fp + c.tn));
  m.tpr = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  return m;
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::SBLUE:
      return "S-BLUE";
    case Algorithm::Oracle:
      return "Oracle";
    case Algorithm::KNN:
      return "KNN";
  }
  return "S-BLUE";
}

MetricsRow average_metrics(Algorithm algorithm, const std::vector<BinaryMetrics>& runs) {
  MetricsRow row;
  row.algorithm = algorithm;
  row.realizations = static_cast<int>(runs.size());
  if (runs.empty()) return row;
  const double n = static_cast<double>(runs.size());
  auto mean_se = [&](auto field, double& mean, double& se) {
    double s = 0.0;
    for (const auto& r : runs) s += field(r);
    mean = s / n;
    double ss = 0.0;
    for (const auto& r : runs) ss += (field(r) - mean) * (field(r) - mean);
    se = runs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  };
  mean_se([](const BinaryMetrics& r) { return r.mse; }, row.mse, row.mse_se);
  mean_se([](const BinaryMetrics& r) { return r.f1; }, row.f1, row.f1_se);
  mean_se([](const BinaryMetrics& r) { return r.fpr; }, row.fpr, row.fpr_se);
  mean_se([](const BinaryMetrics& r) { return r.tpr; }, row.tpr, row.tpr_se);
  return row;
}

}  // namespace bsfr
