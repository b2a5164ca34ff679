#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bsfr/temporal.hpp"

namespace bsfr {

enum class Moment { Mean, Variance, Skewness, Kurtosis };

/// Maps a length-K series to a fixed-length summary vector.
class SummaryStat {
 public:
  enum class Kind { ACF, Moments, Concat };

  static SummaryStat acf(std::vector<int> lags);
  static SummaryStat moments(std::vector<Moment> which);
  static SummaryStat concat(std::vector<SummaryStat> parts);

  Kind kind() const { return kind_; }
  const std::vector<int>& lags() const { return lags_; }
  const std::vector<Moment>& which() const { return moments_; }
  const std::vector<SummaryStat>& parts() const { return parts_; }

  Eigen::Index dimension() const;
  /// Smallest series length the summary accepts.
  Eigen::Index min_length() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const;
  std::string describe() const;

  friend bool operator==(const SummaryStat&, const SummaryStat&) = default;

 private:
  Kind kind_ = Kind::ACF;
  std::vector<int> lags_;
  std::vector<Moment> moments_;
  std::vector<SummaryStat> parts_;
};

/// Sample autocorrelation at the given lags; a constant series yields zeros.
Eigen::VectorXd summary_acf(const Eigen::VectorXd& z, const std::vector<int>& lags);
Eigen::VectorXd summary_moments(const Eigen::VectorXd& z, const std::vector<Moment>& which);

enum class Distance { Euclidean, Manhattan, Chebyshev };

std::string to_string(Distance d);
Distance distance_from_string(const std::string& name);
std::string to_string(Moment m);
Moment moment_from_string(const std::string& name);

/// Simulated summary vectors under both hypotheses. Entries are stored one per
/// column. When standardized, each summary coordinate is centered and scaled by
/// the pooled bank mean and standard deviation, and queries are transformed the
/// same way before distances are taken.
struct SampleBank {
  Eigen::MatrixXd h0;  // l x J
  Eigen::MatrixXd h1;  // l x J
  SummaryStat summary = SummaryStat::acf({1});
  std::uint64_t seed = 0;
  std::string scene_key;
  bool standardized = false;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  Eigen::Index size() const { return h0.cols(); }
  Eigen::Index dimension() const { return h0.rows(); }
  const Eigen::MatrixXd& entries(int label) const { return label == 0 ? h0 : h1; }

  /// Summary of a raw series in bank coordinates.
  Eigen::VectorXd project(const Eigen::VectorXd& z) const;
};

/// J summaries of independent integral-observation draws; draw j uses stream
/// (kBank, hypothesis, j).
Eigen::MatrixXd build_bank(const IntegralSampler& sampler, int hypothesis, int count,
                           const SummaryStat& summary, std::uint64_t seed, int threads = 1);

SampleBank build_sample_bank(const IntegralSampler& sampler0, const IntegralSampler& sampler1,
                             int count, const SummaryStat& summary, std::uint64_t seed,
                             bool standardize = false, int threads = 1);

struct NlrtCounts {
  long n0 = 0;
  long n1 = 0;
};

/// Bank entries within delta of s (already in bank coordinates).
NlrtCounts nlrt_counts(const SampleBank& bank, const Eigen::VectorXd& s, Distance distance,
                       double delta);

inline double nlrt_ratio(const NlrtCounts& counts, double epsilon) {
  return (static_cast<double>(counts.n0) + epsilon) / (static_cast<double>(counts.n1) + epsilon);
}

/// Lambda(Z) = (n0 + epsilon) / (n1 + epsilon).
double nlrt_statistic(const SampleBank& bank, const Eigen::VectorXd& z, Distance distance,
                      double delta, double epsilon);

/// 1 iff statistic < gamma (ties decide 0).
inline int nlrt_decide(double statistic, double gamma) { return statistic < gamma ? 1 : 0; }

class NlrtDetector {
 public:
  NlrtDetector(SampleBank bank, Distance distance, double delta, double epsilon);

  double statistic(const Eigen::VectorXd& z) const;
  const SampleBank& bank() const { return bank_; }
  Distance distance() const { return distance_; }
  double delta() const { return delta_; }
  double epsilon() const { return epsilon_; }

 private:
  SampleBank bank_;
  Distance distance_;
  double delta_;
  double epsilon_;
};

}  // namespace bsfr
