#include "bsfr/sblue.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "bsfr/bivariate_normal.hpp"
#include "bsfr/errors.hpp"
#include "bsfr/normal.hpp"

namespace bsfr {

double expected_decision(const SpatialPrior& prior, const TransitionMatrix& u) {
  const double sigma = std::sqrt(prior.kernel.variance());
  const double a = (prior.c - prior.mean) / sigma;
  return u.p11 * norm_cdf(-a) + u.p01 * norm_cdf(a);
}

SBlueMoments sblue_moments(const std::vector<Point2>& sensors, const std::vector<Point2>& queries,
                           const SpatialPrior& prior, const std::vector<TransitionMatrix>& channels,
                           DiagonalRule rule) {
  const auto n = static_cast<Eigen::Index>(sensors.size());
  if (n < 1) throw DomainError("S-BLUE needs at least one sensor");
  if (channels.size() != sensors.size()) {
    throw DomainError("S-BLUE: one transition matrix per sensor is required");
  }
  const double var = prior.kernel.variance();
  const double sigma = std::sqrt(var);
  const double a = (prior.c - prior.mean) / sigma;

  SBlueMoments m;
  m.mean_yhat.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) m.mean_yhat(i) = expected_decision(prior, channels[i]);

  m.cov_yhat.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TransitionMatrix& ui = channels[i];
    for (Eigen::Index j = 0; j <= i; ++j) {
      const TransitionMatrix& uj = channels[j];
      double cov;
      if (i == j && rule == DiagonalRule::Bernoulli) {
        cov = m.mean_yhat(i) * (1.0 - m.mean_yhat(i));
      } else {
        const double rho = i == j ? 1.0 : std::clamp(prior.kernel(sensors[i], sensors[j]) / var, -1.0, 1.0);
        const Orthants o = binorm_orthant(prior.mean, prior.mean, sigma, sigma, rho, prior.c);
        cov = ui.p01 * uj.p01 * o.ll + ui.p01 * uj.p11 * o.lg + ui.p11 * uj.p01 * o.gl +
              ui.p11 * uj.p11 * o.gg - m.mean_yhat(i) * m.mean_yhat(j);
      }
      m.cov_yhat(i, j) = cov;
      m.cov_yhat(j, i) = cov;
    }
  }

  const double density = std::exp(-0.5 * a * a) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  const Eigen::MatrixXd c_star = cross_gram(prior.kernel, queries, sensors);
  m.cross_cov.resize(c_star.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m.cross_cov.col(i) = (channels[i].p11 - channels[i].p01) * density * c_star.col(i);
  }
  return m;
}

SBlueOffline sblue_offline(const std::vector<Point2>& sensors, const std::vector<Point2>& queries,
                           const SpatialPrior& prior, const std::vector<TransitionMatrix>& channels,
                           DiagonalRule rule) {
  if (queries.empty()) throw DomainError("S-BLUE needs at least one query point");
  SBlueMoments m = sblue_moments(sensors, queries, prior, channels, rule);
  SBlueOffline off;
  off.cov_chol = chol_with_jitter(m.cov_yhat);
  off.mean_yhat = std::move(m.mean_yhat);
  off.cov_yhat = std::move(m.cov_yhat);
  off.cross_cov = std::move(m.cross_cov);
  const auto q = static_cast<Eigen::Index>(queries.size());
  off.mu_star = Eigen::VectorXd::Constant(q, prior.mean);
  off.prior_var = Eigen::VectorXd::Constant(q, prior.kernel.variance());
  off.c = prior.c;
  // risk_q = C(x*, x*) - c_q^T (L L^T)^-1 c_q = prior_var - |L^-1 c_q|^2
  const Eigen::MatrixXd w =
      off.cov_chol.lower.triangularView<Eigen::Lower>().solve(off.cross_cov.transpose());
  off.bayes_risk = (off.prior_var - w.colwise().squaredNorm().transpose()).cwiseMax(0.0);
  return off;
}

Prediction sblue_predict_real(const SBlueOffline& offline, const Eigen::VectorXd& decisions) {
  if (decisions.size() != offline.sensor_count()) {
    throw DomainError("S-BLUE: decision vector length does not match the sensor count");
  }
  const Eigen::VectorXd alpha = offline.cov_chol.solve(Eigen::VectorXd(decisions - offline.mean_yhat));
  Prediction p;
  p.g_hat = offline.mu_star + offline.cross_cov * alpha;
  p.y_hat.resize(p.g_hat.size());
  for (Eigen::Index i = 0; i < p.g_hat.size(); ++i) p.y_hat(i) = p.g_hat(i) >= offline.c ? 1 : 0;
  return p;
}

Prediction sblue_predict(const SBlueOffline& offline, const Eigen::VectorXi& decisions) {
  for (Eigen::Index i = 0; i < decisions.size(); ++i) {
    if (decisions(i) != 0 && decisions(i) != 1) throw DomainError("S-BLUE: decisions must be 0 or 1");
  }
  return sblue_predict_real(offline, decisions.cast<double>());
}

}  // namespace bsfr
