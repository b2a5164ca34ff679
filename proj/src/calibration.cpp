#include "bsfr/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "bsfr/errors.hpp"
#include "bsfr/parallel.hpp"
#include "bsfr/rng.hpp"

namespace bsfr {

std::string to_string(TestKind kind) { return kind == TestKind::WGPLRT ? "wgplrt" : "nlrt"; }

namespace {

template <class Sampler, class Score>
StatisticSample draw(TestKind kind, const Sampler& s0, const Sampler& s1, int replicates,
                     std::uint64_t seed, int threads, const Score& score) {
  if (replicates < 1) throw ConfigError("calibration needs at least one replicate");
  StatisticSample out;
  out.kind = kind;
  for (int label = 0; label < 2; ++label) {
    std::vector<double>& dst = label == 0 ? out.under_h0 : out.under_h1;
    dst.resize(static_cast<std::size_t>(replicates));
    const Sampler& sampler = label == 0 ? s0 : s1;
    parallel_for(dst.size(), threads, [&](std::size_t r) {
      RngStream rng(seed, stream_key(StreamTag::kCalibration,
                                     {static_cast<std::uint64_t>(kind),
                                      static_cast<std::uint64_t>(label), r}));
      dst[r] = score(sampler.sample(rng));
    });
    std::sort(dst.begin(), dst.end());
  }
  return out;
}

}  // namespace

StatisticSample sample_statistics(const WgplrtDetector& detector, const PointSampler& sampler0,
                                  const PointSampler& sampler1, int replicates, std::uint64_t seed,
                                  int threads) {
  return draw(TestKind::WGPLRT, sampler0, sampler1, replicates, seed, threads,
              [&](const Eigen::VectorXd& z) { return detector.statistic(z); });
}

StatisticSample sample_statistics(const NlrtDetector& detector, const IntegralSampler& sampler0,
                                  const IntegralSampler& sampler1, int replicates,
                                  std::uint64_t seed, int threads) {
  return draw(TestKind::NLRT, sampler0, sampler1, replicates, seed, threads,
              [&](const Eigen::VectorXd& z) { return detector.statistic(z); });
}

double empirical_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("empirical_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("empirical_quantile: p outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double threshold_for_alpha(const StatisticSample& sample, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("significance level must lie in (0, 1)");
  return sample.kind == TestKind::WGPLRT ? empirical_quantile(sample.under_h0, 1.0 - alpha)
                                         : empirical_quantile(sample.under_h0, alpha);
}

int decide(TestKind kind, double statistic, double threshold) {
  return kind == TestKind::WGPLRT ? wgplrt_decide(statistic, -threshold)
                                  : nlrt_decide(statistic, threshold);
}

TransitionMatrix transition_matrix(const StatisticSample& sample, double threshold) {
  auto rate = [&](const std::vector<double>& xs, int target) {
    if (xs.empty()) throw DomainError("transition_matrix: empty sample");
    std::size_t n = 0;
    for (double x : xs) n += decide(sample.kind, x, threshold) == target;
    return static_cast<double>(n) / static_cast<double>(xs.size());
  };
  return TransitionMatrix::from_errors(rate(sample.under_h0, 1), rate(sample.under_h1, 0));
}

RocCurve roc(const StatisticSample& sample) {
  // Orient so that larger scores favour H1, then lower the cutoff one tie
  // group at a time.
  const double sign = sample.kind == TestKind::WGPLRT ? 1.0 : -1.0;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(sample.under_h0.size() + sample.under_h1.size());
  for (double x : sample.under_h0) pooled.emplace_back(sign * x, 0);
  for (double x : sample.under_h1) pooled.emplace_back(sign * x, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  const double n0 = static_cast<double>(sample.under_h0.size());
  const double n1 = static_cast<double>(sample.under_h1.size());
  if (n0 == 0.0 || n1 == 0.0) throw DomainError("roc: empty sample");

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  double fp = 0.0;
  double tp = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) {
      (pooled[j].second == 0 ? fp : tp) += 1.0;
      ++j;
    }
    curve.points.push_back({fp / n0, tp / n1});
    i = j;
  }
  curve.auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const RocPoint& a = curve.points[k - 1];
    const RocPoint& b = curve.points[k];
    curve.auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  return curve;
}

}  // namespace bsfr
