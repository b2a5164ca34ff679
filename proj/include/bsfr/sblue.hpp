#pragma once

#include <vector>

#include <Eigen/Core>

#include "bsfr/calibration.hpp"
#include "bsfr/kernels.hpp"
#include "bsfr/mvn.hpp"

namespace bsfr {

/// How Var[yhat_i] is formed.
enum class DiagonalRule {
  /// E[yhat_i](1 - E[yhat_i]), the exact variance of a 0/1 decision.
  Bernoulli,
  /// The off-diagonal covariance formula evaluated at i = j with the rho = 1
  /// orthants. This omits the channel noise variance and understates Var[yhat_i].
  PairwiseLimit,
};

struct SBlueMoments {
  Eigen::VectorXd mean_yhat;  // N
  Eigen::MatrixXd cov_yhat;   // N x N
  Eigen::MatrixXd cross_cov;  // Q x N, Cov[g*, yhat]
};

/// Spatial prior of the latent field: constant mean, stationary kernel.
struct SpatialPrior {
  CovKernel kernel{KernelFamily::SquaredExponential, 1.0, 1.0};
  double mean = 0.0;
  double c = 0.0;
};

double expected_decision(const SpatialPrior& prior, const TransitionMatrix& u);

SBlueMoments sblue_moments(const std::vector<Point2>& sensors, const std::vector<Point2>& queries,
                           const SpatialPrior& prior, const std::vector<TransitionMatrix>& channels,
                           DiagonalRule rule = DiagonalRule::Bernoulli);

struct SBlueOffline {
  Eigen::VectorXd mean_yhat;
  Eigen::MatrixXd cov_yhat;
  CholeskyFactor cov_chol;
  Eigen::MatrixXd cross_cov;
  Eigen::VectorXd mu_star;
  Eigen::VectorXd prior_var;
  Eigen::VectorXd bayes_risk;
  double c = 0.0;

  Eigen::Index sensor_count() const { return mean_yhat.size(); }
  Eigen::Index query_count() const { return mu_star.size(); }
};

SBlueOffline sblue_offline(const std::vector<Point2>& sensors, const std::vector<Point2>& queries,
                           const SpatialPrior& prior, const std::vector<TransitionMatrix>& channels,
                           DiagonalRule rule = DiagonalRule::Bernoulli);

struct Prediction {
  Eigen::VectorXd g_hat;
  Eigen::VectorXi y_hat;
};

/// S-BLUE on 0/1 decisions.
Prediction sblue_predict(const SBlueOffline& offline, const Eigen::VectorXi& decisions);
/// Same linear map applied to an arbitrary real vector.
Prediction sblue_predict_real(const SBlueOffline& offline, const Eigen::VectorXd& decisions);

}  // namespace bsfr
