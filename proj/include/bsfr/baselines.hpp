#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bsfr/kernels.hpp"
#include "bsfr/mvn.hpp"
#include "bsfr/sblue.hpp"

namespace bsfr {

/// Noise-free GP regression of the latent field from its exact values at the
/// sensors: mu + C(x*, X) C(X, X)^-1 (g - mu), thresholded at c.
class OracleRegressor {
 public:
  OracleRegressor(const std::vector<Point2>& sensors, const std::vector<Point2>& queries,
                  const SpatialPrior& prior);

  Prediction predict(const Eigen::VectorXd& sensor_latent) const;

 private:
  SpatialPrior prior_;
  CholeskyFactor chol_;
  Eigen::MatrixXd cross_;  // Q x N
};

/// Plurality vote of the k nearest sensors (Euclidean, ties in distance broken
/// by sensor index); a tied vote predicts 1.
Eigen::VectorXi knn_predict(const Eigen::VectorXi& decisions, const std::vector<Point2>& sensors,
                            const std::vector<Point2>& queries, int k);

struct KnnResult {
  Eigen::VectorXi y_hat;
  int k = 1;
};

/// Chooses k from k_grid by `folds`-fold cross-validation of the misclassification
/// rate on the sensor decisions (smallest k wins ties), then predicts.
KnnResult knn_baseline(const Eigen::VectorXi& decisions, const std::vector<Point2>& sensors,
                       const std::vector<Point2>& queries, const std::vector<int>& k_grid,
                       int folds, std::uint64_t seed, std::uint64_t index);

}  // namespace bsfr
