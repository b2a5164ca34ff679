#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsfr/nlrt.hpp"
#include "bsfr/temporal.hpp"
#include "bsfr/wgplrt.hpp"

namespace bsfr {

enum class TestKind { WGPLRT, NLRT };

std::string to_string(TestKind kind);

/// Monte-Carlo draws of a test statistic with the true label fixed to 0 or 1.
struct StatisticSample {
  std::vector<double> under_h0;  // ascending
  std::vector<double> under_h1;  // ascending
  TestKind kind = TestKind::WGPLRT;
};

/// P(yhat = j | y = i) for a binary decision channel.
struct TransitionMatrix {
  double p00 = 1.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 1.0;

  static TransitionMatrix from_errors(double type1, double type2) {
    return {1.0 - type1, type1, type2, 1.0 - type2};
  }
  static TransitionMatrix perfect() { return {}; }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
  double auc = 0.0;
};

/// Stream (kCalibration, kind, label, r) drives replicate r.
StatisticSample sample_statistics(const WgplrtDetector& detector, const PointSampler& sampler0,
                                  const PointSampler& sampler1, int replicates, std::uint64_t seed,
                                  int threads = 1);
StatisticSample sample_statistics(const NlrtDetector& detector, const IntegralSampler& sampler0,
                                  const IntegralSampler& sampler1, int replicates,
                                  std::uint64_t seed, int threads = 1);

/// Type-7 (linear interpolation) empirical quantile of an ascending sample.
double empirical_quantile(const std::vector<double>& sorted, double p);

/// WGPLRT: the (1 - alpha) quantile of the H0 statistic; NLRT: the alpha quantile.
double threshold_for_alpha(const StatisticSample& sample, double alpha);

/// Applies the test's decision rule to a statistic.
int decide(TestKind kind, double statistic, double threshold);

TransitionMatrix transition_matrix(const StatisticSample& sample, double threshold);

RocCurve roc(const StatisticSample& sample);

}  // namespace bsfr
