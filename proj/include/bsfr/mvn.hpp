#pragma once

#include <array>

#include <Eigen/Core>

#include "bsfr/rng.hpp"

namespace bsfr {

/// Diagonal jitter tried in order until the Cholesky factorization succeeds.
inline constexpr std::array<double, 4> kJitterLadder{0.0, 1e-10, 1e-8, 1e-6};

struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;

  Eigen::Index size() const { return lower.rows(); }
  double log_det() const;
  /// Solves (L L^T) x = b.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
};

/// Lower Cholesky factor of A + jitter I, escalating through kJitterLadder.
/// Throws NotPositiveDefinite when even the largest jitter fails.
CholeskyFactor chol_with_jitter(const Eigen::MatrixXd& a);

struct MvnSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol_lower;
  double jitter_used = 0.0;

  static MvnSpec from_covariance(Eigen::VectorXd mean, const Eigen::MatrixXd& cov);
  Eigen::Index dim() const { return mean.size(); }
};

Eigen::VectorXd mvn_sample(const MvnSpec& spec, RngStream& rng);
double mvn_logpdf(const MvnSpec& spec, const Eigen::VectorXd& x);

}  // namespace bsfr
