#pragma once

#include <vector>

#include <Eigen/Core>

#include "bsfr/kernels.hpp"
#include "bsfr/mvn.hpp"
#include "bsfr/rng.hpp"
#include "bsfr/warping.hpp"

namespace bsfr {

/// Temporal process under one hypothesis: W(f(t)) with f ~ GP(0, kernel) and
/// unit marginal variance.
struct TemporalModel {
  CovKernel kernel{KernelFamily::Matern12, 1.0, 1.0};
  WarpSpec warp{};

  TemporalModel() = default;
  /// Throws DomainError unless kernel.scale() == 1.
  TemporalModel(CovKernel k, WarpSpec w);

  friend bool operator==(const TemporalModel&, const TemporalModel&) = default;
};

/// n equally spaced values from a to b inclusive.
std::vector<double> linspace(double a, double b, int n);

/// Nodes of the integral-observation supergrid: K * substeps + 1 points on [0, T].
std::vector<double> integral_nodes(double horizon, int intervals, int substeps);

/// Draws the latent path f at a fixed set of times.
///
/// Matern-1/2 and Matern-5/2 kernels on ascending times are sampled with their
/// exact linear state-space form (cost linear in the number of times). Other
/// kernels, or unsorted times, fall back to a dense Cholesky factor.
class LatentPathSampler {
 public:
  enum class Method { Auto, Dense, Markov };

  LatentPathSampler(const CovKernel& kernel, std::vector<double> times,
                    Method method = Method::Auto);

  Eigen::VectorXd sample(RngStream& rng) const;
  Method method() const { return method_; }
  const std::vector<double>& times() const { return times_; }

 private:
  struct Step {
    Eigen::MatrixXd transition;
    Eigen::MatrixXd noise_factor;
  };

  const Step& step_for(std::size_t k) const;

  CovKernel kernel_;
  std::vector<double> times_;
  Method method_;
  // Dense
  Eigen::MatrixXd chol_;
  // Markov
  Eigen::MatrixXd stationary_factor_;
  std::vector<Step> steps_;
  bool uniform_steps_ = false;
};

/// Transition matrix and process-noise covariance of the state-space form of a
/// Matern kernel over a time step dt.
struct StateSpaceStep {
  Eigen::MatrixXd transition;
  Eigen::MatrixXd noise_cov;
};

Eigen::MatrixXd matern_stationary_cov(const CovKernel& kernel);
StateSpaceStep matern_discretize(const CovKernel& kernel, double dt);

/// Point observations W(f(t_m)) + N(0, sigma^2).
class PointSampler {
 public:
  PointSampler(TemporalModel model, std::vector<double> times, double sigma);

  Eigen::VectorXd sample(RngStream& rng) const;
  /// Ground truth W(f(t_m)) without noise.
  Eigen::VectorXd sample_truth(RngStream& rng) const;

  const TemporalModel& model() const { return model_; }
  const std::vector<double>& times() const { return path_.times(); }
  double sigma() const { return sigma_; }

 private:
  TemporalModel model_;
  LatentPathSampler path_;
  double sigma_;
};

/// Integral observations over K consecutive intervals of [0, T], each computed
/// by the trapezoid rule on `substeps` subintervals of one joint latent draw,
/// plus N(0, sigma^2) noise.
class IntegralSampler {
 public:
  IntegralSampler(TemporalModel model, double horizon, int intervals, double sigma,
                  int substeps = 50);

  Eigen::VectorXd sample(RngStream& rng) const;
  Eigen::VectorXd sample_truth(RngStream& rng) const;

  int intervals() const { return intervals_; }
  int substeps() const { return substeps_; }
  double sigma() const { return sigma_; }

 private:
  Eigen::VectorXd integrate(const Eigen::VectorXd& warped) const;

  TemporalModel model_;
  double horizon_;
  int intervals_;
  int substeps_;
  double sigma_;
  LatentPathSampler path_;
};

/// Convenience forms that build the sampler on each call.
Eigen::VectorXd sample_point_obs(const TemporalModel& model, const std::vector<double>& times,
                                 double sigma, RngStream& rng);
Eigen::VectorXd sample_integral_obs(const TemporalModel& model, int intervals, double horizon,
                                    double sigma, int substeps, RngStream& rng);

}  // namespace bsfr
