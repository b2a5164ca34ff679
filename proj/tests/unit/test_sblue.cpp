#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "bsfr/baselines.hpp"
#include "bsfr/bivariate_normal.hpp"
#include "bsfr/errors.hpp"
#include "bsfr/normal.hpp"
#include "bsfr/sblue.hpp"
#include "bsfr/temporal.hpp"
#include "oracles.hpp"

using namespace bsfr;

namespace {

const TransitionMatrix kNoisy{0.9, 0.1, 0.17, 0.83};

SpatialPrior unit_prior(double length = 1.0, double mean = 0.0, double c = 0.0) {
  return {CovKernel(KernelFamily::SquaredExponential, 1.0, length), mean, c};
}

int channel(int y, const TransitionMatrix& u, RngStream& rng) {
  const double p1 = y == 1 ? u.p11 : u.p01;
  return rng.uniform() < p1 ? 1 : 0;
}

}  // namespace

TEST(Orthant, ReferenceValue) {
  const Orthants o = binorm_orthant(0, 0, 1, 1, 0.5, 0);
  EXPECT_NEAR(o.gg, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(o.ll, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(o.lg, 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(o.gl, 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(bvn_upper(0, 0, 0), 0.25, 1e-15);
}

TEST(Orthant, SumsToOneAndMatchesQuadrature) {
  for (double rho : {-0.999, -0.7, -0.2, 0.0, 0.3, 0.8, 0.95, 0.9999}) {
    for (double mi : {-1.0, 0.0, 0.5}) {
      for (double c : {-1.5, 0.0, 0.7}) {
        const double si = 1.3, sj = 0.6, mj = 0.2;
        const Orthants o = binorm_orthant(mi, mj, si, sj, rho, c);
        EXPECT_NEAR(o.ll + o.lg + o.gl + o.gg, 1.0, 1e-12);
        Eigen::Matrix2d cov;
        cov << si * si, rho * si * sj, rho * si * sj, sj * sj;
        const Eigen::Vector2d mean(mi, mj);
        EXPECT_NEAR(o.gg, oracle::orthant(mean, cov, {1, 1}, c), 1e-8);
        EXPECT_NEAR(o.lg, oracle::orthant(mean, cov, {0, 1}, c), 1e-8);
        EXPECT_NEAR(o.gl, oracle::orthant(mean, cov, {1, 0}, c), 1e-8);
        EXPECT_NEAR(o.ll, oracle::orthant(mean, cov, {0, 0}, c), 1e-8);
      }
    }
  }
}

TEST(Orthant, BvnCdfMatchesQuadrature) {
  for (double r : {-0.95, -0.3, 0.0, 0.5, 0.99}) {
    for (double h : {-2.0, -0.3, 0.0, 1.1}) {
      for (double k : {-1.0, 0.4, 2.5}) EXPECT_NEAR(bvn_cdf(h, k, r), oracle::bvn_cdf(h, k, r), 1e-10);
    }
  }
  EXPECT_NEAR(bvn_cdf(0.5, 0.2, 1.0), norm_cdf(0.2), 1e-15);
  EXPECT_NEAR(bvn_cdf(0.5, 0.2, -1.0), norm_cdf(0.5) - norm_cdf(-0.2), 1e-15);
  EXPECT_NEAR(bvn_cdf(-0.5, -0.2, -1.0), 0.0, 1e-15);
  EXPECT_NEAR(bvn_cdf(0.5, -0.2, -1.0), norm_cdf(0.5) - norm_cdf(0.2), 1e-15);
}

TEST(SBlue, ExpectedDecision) {
  EXPECT_NEAR(expected_decision(unit_prior(), TransitionMatrix::perfect()), 0.5, 1e-15);
  EXPECT_NEAR(expected_decision(unit_prior(), kNoisy), 0.5 * 0.83 + 0.5 * 0.1, 1e-15);
  const SpatialPrior shifted = unit_prior(1.0, 0.0, 0.8416212335729143);
  EXPECT_NEAR(expected_decision(shifted, TransitionMatrix::perfect()), 0.2, 1e-12);
}

TEST(SBlue, SingleSensorClosedForm) {
  const std::vector<Point2> s{{0, 0}};
  const std::vector<Point2> q{{0, 0}, {0.5, 0}, {3, 0}};
  const SBlueOffline off = sblue_offline(s, q, unit_prior(), {TransitionMatrix::perfect()});
  for (int i = 0; i < 3; ++i) {
    const double k = std::exp(-0.5 * q[i].x * q[i].x);
    EXPECT_NEAR(off.bayes_risk[i], 1.0 - 2.0 / std::numbers::pi * k * k, 1e-12);
    // g_hat for y = 1 is phi(0) k / 0.25 * 0.5.
    EXPECT_NEAR(sblue_predict(off, Eigen::VectorXi::Ones(1)).g_hat[i], 2.0 * norm_pdf(0.0) * k, 1e-12);
  }
}

TEST(SBlue, MomentsMatchMonteCarlo) {
  const std::vector<Point2> s{{0, 0}, {0.6, 0.3}, {1.5, -0.2}};
  const std::vector<Point2> q{{0.3, 0.1}};
  const SpatialPrior prior{CovKernel(KernelFamily::Matern52, 1.4, 0.9), 0.3, 0.5};
  const std::vector<TransitionMatrix> u{kNoisy, TransitionMatrix::from_errors(0.05, 0.3), kNoisy};
  const SBlueMoments m = sblue_moments(s, q, prior, u);
  std::vector<Point2> all = q;
  all.insert(all.end(), s.begin(), s.end());
  const MvnSpec field = MvnSpec::from_covariance(Eigen::VectorXd::Constant(4, prior.mean),
                                                 gram(prior.kernel, std::span<const Point2>(all)));
  RngStream rng(3, stream_key(StreamTag::kTest, {70}));
  const int n = 400000;
  Eigen::MatrixXd yh(3, n);
  Eigen::VectorXd gq(n);
  for (int r = 0; r < n; ++r) {
    const Eigen::VectorXd g = mvn_sample(field, rng);
    gq[r] = g[0];
    for (int i = 0; i < 3; ++i) yh(i, r) = channel(g[i + 1] >= prior.c ? 1 : 0, u[i], rng);
  }
  const Eigen::VectorXd mean = yh.rowwise().mean();
  const Eigen::MatrixXd c = yh.colwise() - mean;
  const Eigen::MatrixXd cov = c * c.transpose() / (n - 1.0);
  const Eigen::RowVectorXd cross = (gq.array() - gq.mean()).matrix().transpose() * c.transpose() / (n - 1.0);
  const double se = 0.5 / std::sqrt(static_cast<double>(n));
  EXPECT_LE((mean - m.mean_yhat).cwiseAbs().maxCoeff(), 4 * se);
  EXPECT_LE((cov - m.cov_yhat).cwiseAbs().maxCoeff(), 8 * se);
  EXPECT_LE((cross - m.cross_cov.row(0)).cwiseAbs().maxCoeff(), 1.4 * 8 * se);
}

TEST(SBlue, UninformativeChannelLeavesPrior) {
  const std::vector<Point2> s{{0, 0}, {1, 0}};
  const std::vector<Point2> q{{0.5, 0.5}};
  const TransitionMatrix coin{0.5, 0.5, 0.5, 0.5};
  const SBlueOffline off = sblue_offline(s, q, unit_prior(1.0, 0.2, 0.2), {coin, coin});
  EXPECT_NEAR(off.bayes_risk[0], 1.0, 1e-12);
  for (const Eigen::Vector2i d : {Eigen::Vector2i(0, 0), Eigen::Vector2i(1, 1), Eigen::Vector2i(0, 1)}) {
    EXPECT_NEAR(sblue_predict(off, d).g_hat[0], 0.2, 1e-12);
  }
}

TEST(SBlue, PredictionIsAffineInDecisions) {
  RngStream rng(4, 0);
  std::vector<Point2> s, q;
  for (int i = 0; i < 12; ++i) s.push_back({3 * rng.uniform(), 3 * rng.uniform()});
  for (int i = 0; i < 5; ++i) q.push_back({3 * rng.uniform(), 3 * rng.uniform()});
  const SBlueOffline off = sblue_offline(s, q, unit_prior(0.8), std::vector<TransitionMatrix>(12, kNoisy));
  Eigen::VectorXd a(12), b(12);
  rng.fill_normal(a);
  rng.fill_normal(b);
  const double t = 0.3;
  const Eigen::VectorXd mix = sblue_predict_real(off, t * a + (1 - t) * b).g_hat;
  const Eigen::VectorXd lin = t * sblue_predict_real(off, a).g_hat + (1 - t) * sblue_predict_real(off, b).g_hat;
  EXPECT_LE((mix - lin).norm(), 1e-10);
  EXPECT_LE((sblue_predict_real(off, off.mean_yhat).g_hat - off.mu_star).norm(), 1e-12);
}

TEST(SBlue, RiskShrinksWithMoreAndBetterSensors) {
  const std::vector<Point2> q{{0.5, 0.5}, {2, 2}};
  std::vector<Point2> s{{0, 0}};
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(2, 1.0);
  for (int n = 1; n <= 6; ++n) {
    const SBlueOffline off = sblue_offline(s, q, unit_prior(), std::vector<TransitionMatrix>(s.size(), kNoisy));
    EXPECT_TRUE((off.bayes_risk.array() <= prev.array() + 1e-12).all());
    EXPECT_TRUE((off.bayes_risk.array() >= 0.0).all());
    prev = off.bayes_risk;
    s.push_back({0.4 * n, 0.3 * n});
  }
  const std::vector<Point2> one{{0, 0}};
  const double noisy = sblue_offline(one, q, unit_prior(), {kNoisy}).bayes_risk[0];
  const double clean = sblue_offline(one, q, unit_prior(), {TransitionMatrix::perfect()}).bayes_risk[0];
  EXPECT_LT(clean, noisy);
}

TEST(SBlue, PositiveDecisionRaisesNearbyEstimate) {
  const std::vector<Point2> s{{0, 0}};
  const std::vector<Point2> q{{0.2, 0}};
  const SBlueOffline off = sblue_offline(s, q, unit_prior(), {kNoisy});
  EXPECT_GT(sblue_predict(off, Eigen::VectorXi::Ones(1)).g_hat[0], 0.0);
  EXPECT_LT(sblue_predict(off, Eigen::VectorXi::Zero(1)).g_hat[0], 0.0);
  EXPECT_EQ(sblue_predict(off, Eigen::VectorXi::Ones(1)).y_hat[0], 1);
  EXPECT_EQ(sblue_predict(off, Eigen::VectorXi::Zero(1)).y_hat[0], 0);
}

TEST(SBlue, DiagonalRules) {
  const std::vector<Point2> s{{0, 0}, {0.7, 0}};
  const std::vector<Point2> q{{0.3, 0}};
  const auto perfect = std::vector<TransitionMatrix>(2, TransitionMatrix::perfect());
  const SBlueMoments a = sblue_moments(s, q, unit_prior(), perfect, DiagonalRule::Bernoulli);
  const SBlueMoments b = sblue_moments(s, q, unit_prior(), perfect, DiagonalRule::PairwiseLimit);
  EXPECT_LE((a.cov_yhat - b.cov_yhat).norm(), 1e-12);
  const auto noisy = std::vector<TransitionMatrix>(2, kNoisy);
  const SBlueMoments c = sblue_moments(s, q, unit_prior(), noisy, DiagonalRule::Bernoulli);
  const SBlueMoments d = sblue_moments(s, q, unit_prior(), noisy, DiagonalRule::PairwiseLimit);
  EXPECT_GT(c.cov_yhat(0, 0), d.cov_yhat(0, 0));
  EXPECT_NEAR(c.cov_yhat(0, 1), d.cov_yhat(0, 1), 1e-15);
}

TEST(SBlue, InvalidInputs) {
  const std::vector<Point2> s{{0, 0}};
  const std::vector<Point2> q{{1, 0}};
  EXPECT_THROW(sblue_offline(s, q, unit_prior(), {}), DomainError);
  EXPECT_THROW(sblue_offline(s, {}, unit_prior(), {kNoisy}), DomainError);
  const SBlueOffline off = sblue_offline(s, q, unit_prior(), {kNoisy});
  EXPECT_THROW(sblue_predict(off, Eigen::VectorXi::Constant(1, 2)), DomainError);
  EXPECT_THROW(sblue_predict(off, Eigen::VectorXi::Zero(2)), DomainError);
}

TEST(SBlue, BayesRiskMatchesEmpiricalError) {
  const std::vector<Point2> s{{0, 0}, {0.8, 0.1}, {0.2, 0.9}, {1.2, 1.1}};
  const std::vector<Point2> q{{0.5, 0.5}};
  const SpatialPrior prior = unit_prior(1.0);
  const std::vector<TransitionMatrix> u(4, kNoisy);
  const SBlueOffline off = sblue_offline(s, q, prior, u);
  std::vector<Point2> all = q;
  all.insert(all.end(), s.begin(), s.end());
  const MvnSpec field = MvnSpec::from_covariance(Eigen::VectorXd::Zero(5), gram(prior.kernel, std::span<const Point2>(all)));
  RngStream rng(5, stream_key(StreamTag::kTest, {71}));
  const int n = 200000;
  double se_sum = 0.0, se_sq = 0.0;
  for (int r = 0; r < n; ++r) {
    const Eigen::VectorXd g = mvn_sample(field, rng);
    Eigen::VectorXi d(4);
    for (int i = 0; i < 4; ++i) d[i] = channel(g[i + 1] >= 0.0 ? 1 : 0, u[i], rng);
    const double e = std::pow(g[0] - sblue_predict(off, d).g_hat[0], 2);
    se_sum += e;
    se_sq += e * e;
  }
  const double mean = se_sum / n;
  const double sd = std::sqrt((se_sq / n - mean * mean) / n);
  EXPECT_LE(std::abs(mean - off.bayes_risk[0]), 3 * sd);
}

TEST(SBlue, AgreesWithExactPosteriorOnSmallInstances) {
  const TemporalModel h0(CovKernel(KernelFamily::Matern12, 1.0, 1.0), WarpSpec::identity());
  const TemporalModel h1(CovKernel(KernelFamily::Matern52, 1.0, 1.0), WarpSpec::identity());
  const auto t = linspace(0.0, 5.0, 10);
  const double sigma = 0.1;
  const Eigen::MatrixXd k0 = gram(h0.kernel, std::span<const double>(t)) + sigma * sigma * Eigen::MatrixXd::Identity(10, 10);
  const Eigen::MatrixXd k1 = gram(h1.kernel, std::span<const double>(t)) + sigma * sigma * Eigen::MatrixXd::Identity(10, 10);
  const PointSampler s0(h0, t, sigma), s1(h1, t, sigma);
  auto llr = [&](const Eigen::VectorXd& z) { return oracle::gauss_logpdf(k1, z) - oracle::gauss_logpdf(k0, z); };

  RngStream rng(6, stream_key(StreamTag::kTest, {72}));
  // Channel of the exact LRT at threshold 0, estimated by simulation.
  int fp = 0, fn = 0;
  const int cal = 20000;
  for (int i = 0; i < cal; ++i) {
    fp += llr(s0.sample(rng)) > 0.0;
    fn += llr(s1.sample(rng)) <= 0.0;
  }
  const TransitionMatrix u = TransitionMatrix::from_errors(static_cast<double>(fp) / cal, static_cast<double>(fn) / cal);

  const SpatialPrior prior = unit_prior(1.0);
  int agree = 0;
  const int instances = 200;
  for (int it = 0; it < instances; ++it) {
    const std::vector<Point2> sensors{{2 * rng.uniform(), 2 * rng.uniform()}, {2 * rng.uniform(), 2 * rng.uniform()}};
    const Point2 query{2 * rng.uniform(), 2 * rng.uniform()};
    std::vector<Point2> all{query};
    all.insert(all.end(), sensors.begin(), sensors.end());
    const MvnSpec field = MvnSpec::from_covariance(Eigen::VectorXd::Zero(3), gram(prior.kernel, std::span<const Point2>(all)));
    const Eigen::VectorXd g = mvn_sample(field, rng);
    std::vector<std::array<double, 2>> loglik(2);
    Eigen::VectorXi d(2);
    for (int n = 0; n < 2; ++n) {
      const Eigen::VectorXd z = g[n + 1] >= 0.0 ? s1.sample(rng) : s0.sample(rng);
      loglik[n] = {oracle::gauss_logpdf(k0, z), oracle::gauss_logpdf(k1, z)};
      d[n] = loglik[n][1] - loglik[n][0] > 0.0 ? 1 : 0;
    }
    const double post = oracle::posterior_bruteforce(query, sensors, prior.kernel, 0.0, 0.0, loglik);
    const SBlueOffline off = sblue_offline(sensors, {query}, prior, {u, u});
    agree += (post >= 0.5 ? 1 : 0) == sblue_predict(off, d).y_hat[0];
  }
  EXPECT_GE(static_cast<double>(agree) / instances, 0.8);
}

TEST(OracleBaseline, InterpolatesAndMatchesConditionalMean) {
  const std::vector<Point2> s{{0, 0}, {1, 0}, {0, 1}};
  const std::vector<Point2> q{{1, 0}, {0.4, 0.4}};
  const SpatialPrior prior = unit_prior(0.7, 1.5, 1.5);
  const OracleRegressor reg(s, q, prior);
  const Eigen::Vector3d g(2.0, 0.5, 1.7);
  const Prediction p = reg.predict(g);
  EXPECT_NEAR(p.g_hat[0], 0.5, 1e-8);
  const Eigen::MatrixXd k = gram(prior.kernel, std::span<const Point2>(s));
  const Eigen::MatrixXd kq = cross_gram(prior.kernel, std::span<const Point2>(q), std::span<const Point2>(s));
  const Eigen::VectorXd expect = (kq * k.ldlt().solve(Eigen::VectorXd(g.array() - 1.5))).array() + 1.5;
  EXPECT_NEAR(p.g_hat[1], expect[1], 1e-10);
  EXPECT_EQ(p.y_hat[0], 0);
  EXPECT_EQ(p.y_hat[1], expect[1] >= 1.5 ? 1 : 0);
}

TEST(OracleBaseline, BeatsSBlueInExpectation) {
  // The noise-free latent values carry strictly more information than the decisions.
  const std::vector<Point2> s{{0, 0}, {0.8, 0.1}, {0.2, 0.9}};
  const std::vector<Point2> q{{0.5, 0.5}};
  const SpatialPrior prior = unit_prior();
  const OracleRegressor reg(s, q, prior);
  const SBlueOffline off = sblue_offline(s, q, prior, std::vector<TransitionMatrix>(3, TransitionMatrix::perfect()));
  std::vector<Point2> all = q;
  all.insert(all.end(), s.begin(), s.end());
  const MvnSpec field = MvnSpec::from_covariance(Eigen::VectorXd::Zero(4), gram(prior.kernel, std::span<const Point2>(all)));
  RngStream rng(7, 0);
  double e_or = 0.0, e_sb = 0.0;
  for (int r = 0; r < 20000; ++r) {
    const Eigen::VectorXd g = mvn_sample(field, rng);
    const Eigen::VectorXd gs = g.tail(3);
    Eigen::VectorXi d(3);
    for (int i = 0; i < 3; ++i) d[i] = gs[i] >= 0.0;
    e_or += std::pow(g[0] - reg.predict(gs).g_hat[0], 2);
    e_sb += std::pow(g[0] - sblue_predict(off, d).g_hat[0], 2);
  }
  EXPECT_LT(e_or, e_sb);
}

TEST(KnnBaseline, TrivialCases) {
  const std::vector<Point2> s{{0, 0}, {1, 0}, {2, 0}};
  const std::vector<Point2> q{{0.1, 0}, {1.9, 0}, {1.0, 0.1}};
  const Eigen::Vector3i d(1, 0, 0);
  EXPECT_EQ(knn_predict(d, s, q, 1), Eigen::Vector3i(1, 0, 0));
  EXPECT_EQ(knn_predict(d, s, q, 3), Eigen::Vector3i(0, 0, 0));
  EXPECT_EQ(knn_predict(Eigen::Vector3i(1, 1, 1), s, q, 3), Eigen::Vector3i(1, 1, 1));
  // A 1-1 vote tie predicts 1.
  const std::vector<Point2> two{{0, 0}, {1, 0}};
  EXPECT_EQ(knn_predict(Eigen::Vector2i(0, 1), two, {{0.5, 0}}, 2)[0], 1);
  EXPECT_THROW(knn_predict(d, s, q, 4), DomainError);
}

TEST(KnnBaseline, CrossValidationIsDeterministic) {
  RngStream rng(8, 0);
  std::vector<Point2> s, q;
  Eigen::VectorXi d(40);
  for (int i = 0; i < 40; ++i) {
    s.push_back({rng.uniform(), rng.uniform()});
    d[i] = s.back().x > 0.5;
  }
  for (int i = 0; i < 10; ++i) q.push_back({rng.uniform(), rng.uniform()});
  const KnnResult a = knn_baseline(d, s, q, {1, 3, 5, 7}, 5, 1, 2);
  const KnnResult b = knn_baseline(d, s, q, {1, 3, 5, 7}, 5, 1, 2);
  EXPECT_EQ(a.k, b.k);
  EXPECT_EQ(a.y_hat, b.y_hat);
  for (int i = 0; i < 10; ++i) {
    if (std::abs(q[i].x - 0.5) > 0.15) EXPECT_EQ(a.y_hat[i], q[i].x > 0.5 ? 1 : 0);
  }
}
