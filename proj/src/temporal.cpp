#include "bsfr/temporal.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "bsfr/errors.hpp"

namespace bsfr {

TemporalModel::TemporalModel(CovKernel k, WarpSpec w) : kernel(k), warp(std::move(w)) {
  if (kernel.scale() != 1.0) {
    throw DomainError("temporal kernels must have unit marginal variance (scale = 1)");
  }
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw DomainError("linspace: n must be positive");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = a;
    return out;
  }
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + h * i;
  out.back() = b;
  return out;
}

std::vector<double> integral_nodes(double horizon, int intervals, int substeps) {
  if (intervals < 1 || substeps < 1) throw DomainError("integral_nodes: counts must be positive");
  return linspace(0.0, horizon, intervals * substeps + 1);
}

// ---------------------------------------------------------------- state space

namespace {

struct MaternSde {
  Eigen::MatrixXd drift;
  Eigen::VectorXd loading;
  double spectral = 0.0;
};

MaternSde matern_sde(const CovKernel& kernel) {
  const double s2 = kernel.variance();
  MaternSde sde;
  switch (kernel.family()) {
    case KernelFamily::Matern12: {
      const double lam = 1.0 / kernel.length_scale();
      sde.drift = Eigen::MatrixXd::Constant(1, 1, -lam);
      sde.loading = Eigen::VectorXd::Ones(1);
      sde.spectral = 2.0 * s2 * lam;
      break;
    }
    case KernelFamily::Matern52: {
      const double lam = std::sqrt(5.0) / kernel.length_scale();
      sde.drift = Eigen::MatrixXd::Zero(3, 3);
      sde.drift(0, 1) = 1.0;
      sde.drift(1, 2) = 1.0;
      sde.drift(2, 0) = -lam * lam * lam;
      sde.drift(2, 1) = -3.0 * lam * lam;
      sde.drift(2, 2) = -3.0 * lam;
      sde.loading = Eigen::VectorXd::Unit(3, 2);
      sde.spectral = 16.0 / 3.0 * s2 * std::pow(lam, 5);
      break;
    }
    default:
      throw DomainError("state-space form is only available for Matern-1/2 and Matern-5/2");
  }
  return sde;
}

double decay_rate(const CovKernel& kernel) {
  return kernel.family() == KernelFamily::Matern12 ? 1.0 / kernel.length_scale()
                                                   : std::sqrt(5.0) / kernel.length_scale();
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

Eigen::MatrixXd matern_stationary_cov(const CovKernel& kernel) {
  const double s2 = kernel.variance();
  if (kernel.family() == KernelFamily::Matern12) return Eigen::MatrixXd::Constant(1, 1, s2);
  if (kernel.family() != KernelFamily::Matern52) {
    throw DomainError("state-space form is only available for Matern-1/2 and Matern-5/2");
  }
  const double lam = std::sqrt(5.0) / kernel.length_scale();
  const double kappa = s2 * lam * lam / 3.0;
  Eigen::MatrixXd p(3, 3);
  p << s2, 0.0, -kappa, 0.0, kappa, 0.0, -kappa, 0.0, std::pow(lam, 4) * s2;
  return p;
}

StateSpaceStep matern_discretize(const CovKernel& kernel, double dt) {
  if (!(dt >= 0.0)) throw DomainError("matern_discretize: negative time step");
  const MaternSde sde = matern_sde(kernel);
  const Eigen::Index p = sde.drift.rows();
  StateSpaceStep out;
  if (decay_rate(kernel) * dt < 1.0) {
    // Van Loan: exp([[-F, L q L^T], [0, F^T]] dt) = [[., B], [0, C]] with
    // A = C^T and Qd = A B.
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * p, 2 * p);
    block.topLeftCorner(p, p) = -sde.drift;
    block.topRightCorner(p, p) = sde.spectral * sde.loading * sde.loading.transpose();
    block.bottomRightCorner(p, p) = sde.drift.transpose();
    const Eigen::MatrixXd e = (block * dt).exp();
    out.transition = e.bottomRightCorner(p, p).transpose();
    out.noise_cov = out.transition * e.topRightCorner(p, p);
  } else {
    out.transition = (sde.drift * dt).exp();
    const Eigen::MatrixXd pinf = matern_stationary_cov(kernel);
    out.noise_cov = pinf - out.transition * pinf * out.transition.transpose();
  }
  out.noise_cov = 0.5 * (out.noise_cov + out.noise_cov.transpose());
  return out;
}

// ---------------------------------------------------------------- path sampler

LatentPathSampler::LatentPathSampler(const CovKernel& kernel, std::vector<double> times,
                                     Method method)
    : kernel_(kernel), times_(std::move(times)), method_(method) {
  if (times_.empty()) throw DomainError("LatentPathSampler: no sample times");
  const bool markov_kernel =
      kernel_.family() == KernelFamily::Matern12 || kernel_.family() == KernelFamily::Matern52;
  const bool sorted = std::is_sorted(times_.begin(), times_.end());
  if (method_ == Method::Auto) method_ = markov_kernel && sorted ? Method::Markov : Method::Dense;
  if (method_ == Method::Markov && !(markov_kernel && sorted)) {
    throw DomainError("Markov path sampling needs a Matern-1/2 or Matern-5/2 kernel on sorted times");
  }

  if (method_ == Method::Dense) {
    chol_ = chol_with_jitter(gram(kernel_, times_)).lower;
    return;
  }

  stationary_factor_ = psd_factor(matern_stationary_cov(kernel_));
  const std::size_t n = times_.size();
  if (n == 1) return;
  const double span = times_.back() - times_.front();
  const double h = span / static_cast<double>(n - 1);
  uniform_steps_ = true;
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs((times_[k] - times_[k - 1]) - h) > 1e-9 * std::max(1.0, h)) {
      uniform_steps_ = false;
      break;
    }
  }
  const std::size_t count = uniform_steps_ ? 1 : n - 1;
  steps_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double dt = uniform_steps_ ? h : times_[k + 1] - times_[k];
    const StateSpaceStep s = matern_discretize(kernel_, dt);
    steps_.push_back({s.transition, psd_factor(s.noise_cov)});
  }
}

const LatentPathSampler::Step& LatentPathSampler::step_for(std::size_t k) const {
  return uniform_steps_ ? steps_.front() : steps_[k];
}

Eigen::VectorXd LatentPathSampler::sample(RngStream& rng) const {
  const auto n = static_cast<Eigen::Index>(times_.size());
  Eigen::VectorXd out(n);
  if (method_ == Method::Dense) {
    Eigen::VectorXd z(n);
    rng.fill_normal(z);
    out.noalias() = chol_.triangularView<Eigen::Lower>() * z;
    return out;
  }
  const Eigen::Index p = stationary_factor_.rows();
  Eigen::VectorXd z(p);
  rng.fill_normal(z);
  Eigen::VectorXd state = stationary_factor_ * z;
  out(0) = state(0);
  for (Eigen::Index k = 1; k < n; ++k) {
    const Step& step = step_for(static_cast<std::size_t>(k - 1));
    rng.fill_normal(z);
    state = step.transition * state + step.noise_factor * z;
    out(k) = state(0);
  }
  return out;
}

// ---------------------------------------------------------------- observations

PointSampler::PointSampler(TemporalModel model, std::vector<double> times, double sigma)
    : model_(std::move(model)), path_(model_.kernel, std::move(times)), sigma_(sigma) {
  if (!(sigma_ >= 0.0)) throw DomainError("PointSampler: noise sigma must be nonnegative");
}

Eigen::VectorXd PointSampler::sample_truth(RngStream& rng) const {
  Eigen::VectorXd f = path_.sample(rng);
  for (Eigen::Index m = 0; m < f.size(); ++m) f(m) = model_.warp.forward(f(m));
  return f;
}

Eigen::VectorXd PointSampler::sample(RngStream& rng) const {
  Eigen::VectorXd z = sample_truth(rng);
  for (Eigen::Index m = 0; m < z.size(); ++m) z(m) += sigma_ * rng.normal();
  return z;
}

IntegralSampler::IntegralSampler(TemporalModel model, double horizon, int intervals, double sigma,
                                 int substeps)
    : model_(std::move(model)),
      horizon_(horizon),
      intervals_(intervals),
      substeps_(substeps),
      sigma_(sigma),
      path_(model_.kernel, integral_nodes(horizon, intervals, substeps)) {
  if (!(horizon_ > 0.0)) throw DomainError("IntegralSampler: horizon must be positive");
  if (intervals_ < 1) throw DomainError("IntegralSampler: need at least one interval");
  if (substeps_ < 2) throw DomainError("IntegralSampler: need at least two substeps");
  if (!(sigma_ >= 0.0)) throw DomainError("IntegralSampler: noise sigma must be nonnegative");
}

Eigen::VectorXd IntegralSampler::integrate(const Eigen::VectorXd& warped) const {
  const double h = horizon_ / (static_cast<double>(intervals_) * substeps_);
  Eigen::VectorXd out(intervals_);
  for (int k = 0; k < intervals_; ++k) {
    const Eigen::Index base = static_cast<Eigen::Index>(k) * substeps_;
    double acc = 0.5 * (warped(base) + warped(base + substeps_));
    for (int q = 1; q < substeps_; ++q) acc += warped(base + q);
    out(k) = h * acc;
  }
  return out;
}

Eigen::VectorXd IntegralSampler::sample_truth(RngStream& rng) const {
  Eigen::VectorXd f = path_.sample(rng);
  for (Eigen::Index m = 0; m < f.size(); ++m) f(m) = model_.warp.forward(f(m));
  return integrate(f);
}

Eigen::VectorXd IntegralSampler::sample(RngStream& rng) const {
  Eigen::VectorXd z = sample_truth(rng);
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) += sigma_ * rng.normal();
  return z;
}

Eigen::VectorXd sample_point_obs(const TemporalModel& model, const std::vector<double>& times,
                                 double sigma, RngStream& rng) {
  return PointSampler(model, times, sigma).sample(rng);
}

Eigen::VectorXd sample_integral_obs(const TemporalModel& model, int intervals, double horizon,
                                    double sigma, int substeps, RngStream& rng) {
  return IntegralSampler(model, horizon, intervals, sigma, substeps).sample(rng);
}

}  // namespace bsfr
