#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bsfr/mvn.hpp"
#include "bsfr/temporal.hpp"

namespace bsfr {

/// Q(v) = -1/2 G(v)^T K^{-1} G(v) + sum_m log G'(v_m), with K given by its
/// Cholesky factor. Throws DomainError if some v_m is outside range(W).
double q_function(const WarpSpec& warp, const CholeskyFactor& k_chol, const Eigen::VectorXd& v);

struct QDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  /// -Hessian of Q.
  Eigen::MatrixXd neg_hessian;
};

QDerivatives q_derivatives(const WarpSpec& warp, const CholeskyFactor& k_chol,
                           const Eigen::VectorXd& v);

struct LaplaceOptions {
  double grad_tol = 1e-6;
  int max_iter = 200;
  int restarts = 5;
  double restart_sd = 0.5;  // latent-space perturbation of the start point
  std::uint64_t seed = 0;
};

/// Laplace approximation of p(Z | H) for one hypothesis at fixed times and
/// noise level.
struct LaplaceCache {
  Eigen::VectorXd v_hat;
  Eigen::MatrixXd a;          // -Hessian of Q at v_hat
  double q_at_vhat = 0.0;
  double logdet_k = 0.0;
  double logdet_a_plus = 0.0;  // log det(A + sigma^-2 I)
  Eigen::MatrixXd precision;   // (A^{-1} + sigma^2 I)^{-1}
  double log_c_hat = 0.0;
  double sigma = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;

  Eigen::Index dim() const { return v_hat.size(); }
};

LaplaceCache laplace_fit(const TemporalModel& model, const std::vector<double>& times,
                         double sigma, const LaplaceOptions& options = {});

double approx_log_likelihood(const LaplaceCache& cache, const Eigen::VectorXd& z);

/// -log Lambda(Z) = log p1(Z) - log p0(Z), assembled from the cached pieces.
double wgplrt_statistic(const LaplaceCache& cache0, const LaplaceCache& cache1,
                        const Eigen::VectorXd& z);

/// 1 iff statistic > -log gamma (ties decide 0).
inline int wgplrt_decide(double statistic, double log_gamma) {
  return statistic > -log_gamma ? 1 : 0;
}

/// Both hypothesis fits for one (times, sigma) configuration.
class WgplrtDetector {
 public:
  WgplrtDetector(const TemporalModel& h0, const TemporalModel& h1, const std::vector<double>& times,
                 double sigma, const LaplaceOptions& options = {});
  WgplrtDetector(LaplaceCache cache0, LaplaceCache cache1);

  double statistic(const Eigen::VectorXd& z) const { return wgplrt_statistic(cache0_, cache1_, z); }
  const LaplaceCache& cache(int label) const { return label == 0 ? cache0_ : cache1_; }

 private:
  LaplaceCache cache0_;
  LaplaceCache cache1_;
};

}  // namespace bsfr
