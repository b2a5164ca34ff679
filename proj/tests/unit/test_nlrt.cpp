#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bsfr/errors.hpp"
#include "bsfr/nlrt.hpp"

using namespace bsfr;

namespace {

SampleBank random_bank(int l, int j, std::uint64_t seed) {
  RngStream rng(seed, stream_key(StreamTag::kTest, {50}));
  SampleBank b;
  b.summary = SummaryStat::acf(std::vector<int>(1, 1));
  b.h0.resize(l, j);
  b.h1.resize(l, j);
  for (Eigen::Index i = 0; i < b.h0.size(); ++i) b.h0.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < b.h1.size(); ++i) b.h1.data()[i] = 0.5 + rng.normal();
  return b;
}

long brute_count(const Eigen::MatrixXd& e, const Eigen::VectorXd& s, Distance d, double delta) {
  long n = 0;
  for (Eigen::Index c = 0; c < e.cols(); ++c) {
    const Eigen::VectorXd diff = e.col(c) - s;
    double dist = 0.0;
    switch (d) {
      case Distance::Euclidean:
        dist = diff.norm();
        break;
      case Distance::Manhattan:
        dist = diff.lpNorm<1>();
        break;
      case Distance::Chebyshev:
        dist = diff.lpNorm<Eigen::Infinity>();
        break;
    }
    n += dist <= delta;
  }
  return n;
}

IntegralSampler sampler(KernelFamily fam, int k, double sigma) {
  return IntegralSampler(TemporalModel(CovKernel(fam, 1.0, 1.0), WarpSpec::tukey_gh(0.1, 0.4, 1, 1)), 20.0, k,
                         sigma, 50);
}

}  // namespace

TEST(Summary, AcfExamples) {
  const Eigen::Vector4d z(1, 2, 3, 4);
  const Eigen::VectorXd a = summary_acf(z, {1, 2});
  EXPECT_NEAR(a[0], 0.25, 1e-15);
  EXPECT_NEAR(a[1], -0.3, 1e-15);
  EXPECT_EQ(summary_acf(Eigen::VectorXd::Constant(5, 2.0), {1, 2, 3}), Eigen::Vector3d::Zero());
  EXPECT_THROW(summary_acf(z, {4}), DomainError);
  const Eigen::VectorXd alt = summary_acf(Eigen::Vector4d(1, -1, 1, -1), {1});
  EXPECT_NEAR(alt[0], -0.75, 1e-15);
}

TEST(Summary, AcfIsScaleAndShiftInvariant) {
  RngStream rng(1, 0);
  Eigen::VectorXd z(30);
  rng.fill_normal(z);
  const Eigen::VectorXd moved = 3.0 * z.array() + 7.0;
  EXPECT_LE((summary_acf(z, {1, 2, 3, 4}) - summary_acf(moved, {1, 2, 3, 4})).norm(), 1e-12);
}

TEST(Summary, MomentsExamples) {
  const Eigen::Vector4d z(1, 2, 3, 4);
  const Eigen::VectorXd m =
      summary_moments(z, {Moment::Mean, Moment::Variance, Moment::Skewness, Moment::Kurtosis});
  EXPECT_DOUBLE_EQ(m[0], 2.5);
  EXPECT_DOUBLE_EQ(m[1], 1.25);
  EXPECT_NEAR(m[2], 0.0, 1e-15);
  EXPECT_NEAR(m[3], (2 * 5.0625 + 2 * 0.0625) / 4 / (1.25 * 1.25), 1e-14);
}

TEST(Summary, ConcatAndDimensions) {
  const SummaryStat s = SummaryStat::concat({SummaryStat::acf({1, 2}), SummaryStat::moments({Moment::Variance})});
  EXPECT_EQ(s.dimension(), 3);
  EXPECT_EQ(s.min_length(), 3);
  const Eigen::VectorXd v = s.apply(Eigen::Vector4d(1, 2, 3, 4));
  EXPECT_NEAR(v[0], 0.25, 1e-15);
  EXPECT_NEAR(v[2], 1.25, 1e-15);
  EXPECT_THROW(SummaryStat::acf({}), ConfigError);
  EXPECT_THROW(SummaryStat::acf({0}), ConfigError);
}

TEST(Nlrt, RatioExamples) {
  EXPECT_DOUBLE_EQ(nlrt_ratio({0, 0}, 0.1), 1.0);
  EXPECT_NEAR(nlrt_ratio({10, 0}, 0.1), 101.0, 1e-12);
  EXPECT_NEAR(nlrt_ratio({0, 10}, 0.1), 1.0 / 101.0, 1e-15);
  EXPECT_NEAR(nlrt_ratio({5, 5}, 0.1), 1.0, 1e-15);
}

TEST(Nlrt, DecisionTiesGoToZero) {
  EXPECT_EQ(nlrt_decide(0.5, 0.5), 0);
  EXPECT_EQ(nlrt_decide(0.4999, 0.5), 1);
  EXPECT_EQ(nlrt_decide(2.0, 0.5), 0);
}

TEST(Nlrt, CountsMatchBruteForce) {
  const SampleBank b = random_bank(3, 500, 2);
  RngStream rng(3, 0);
  for (auto d : {Distance::Euclidean, Distance::Manhattan, Distance::Chebyshev}) {
    for (int i = 0; i < 20; ++i) {
      Eigen::VectorXd s(3);
      rng.fill_normal(s);
      for (double delta : {0.2, 0.7, 1.5}) {
        const NlrtCounts c = nlrt_counts(b, s, d, delta);
        EXPECT_EQ(c.n0, brute_count(b.h0, s, d, delta));
        EXPECT_EQ(c.n1, brute_count(b.h1, s, d, delta));
      }
    }
  }
}

TEST(Nlrt, CountsMonotoneInDelta) {
  const SampleBank b = random_bank(4, 1000, 4);
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(4);
  long prev0 = -1, prev1 = -1;
  for (double delta = 0.1; delta < 4.0; delta += 0.1) {
    const NlrtCounts c = nlrt_counts(b, s, Distance::Euclidean, delta);
    EXPECT_GE(c.n0, prev0);
    EXPECT_GE(c.n1, prev1);
    prev0 = c.n0;
    prev1 = c.n1;
  }
  EXPECT_EQ(nlrt_counts(b, s, Distance::Euclidean, 1e6).n0, 1000);
}

TEST(Nlrt, SwappingBanksInvertsRatio) {
  SampleBank b = random_bank(2, 400, 5);
  SampleBank swapped = b;
  std::swap(swapped.h0, swapped.h1);
  const Eigen::Vector2d s(0.3, 0.1);
  const double r = nlrt_ratio(nlrt_counts(b, s, Distance::Euclidean, 0.5), 0.1);
  const double rs = nlrt_ratio(nlrt_counts(swapped, s, Distance::Euclidean, 0.5), 0.1);
  EXPECT_NEAR(r * rs, 1.0, 1e-12);
}

TEST(Nlrt, InvalidArguments) {
  const SampleBank b = random_bank(2, 10, 6);
  EXPECT_THROW(nlrt_counts(b, Eigen::Vector3d::Zero(), Distance::Euclidean, 0.1), DomainError);
  EXPECT_THROW(nlrt_counts(b, Eigen::Vector2d::Zero(), Distance::Euclidean, 0.0), DomainError);
  EXPECT_THROW(NlrtDetector(b, Distance::Euclidean, 0.1, 0.0), ConfigError);
  EXPECT_THROW(distance_from_string("cosine"), ConfigError);
}

TEST(Nlrt, BankIsDeterministicAndThreadIndependent) {
  const auto s0 = sampler(KernelFamily::Matern12, 20, 0.1);
  const auto s1 = sampler(KernelFamily::Matern52, 20, 0.1);
  const SummaryStat acf = SummaryStat::acf({1, 2, 3, 4});
  const SampleBank a = build_sample_bank(s0, s1, 200, acf, 7, false, 1);
  const SampleBank b = build_sample_bank(s0, s1, 200, acf, 7, false, 3);
  EXPECT_EQ(a.h0, b.h0);
  EXPECT_EQ(a.h1, b.h1);
  EXPECT_EQ(a.dimension(), 4);
  EXPECT_EQ(a.size(), 200);
  EXPECT_THROW(build_bank(sampler(KernelFamily::Matern12, 3, 0.1), 0, 5, acf, 1), ConfigError);
}

TEST(Nlrt, StandardizedBankHasUnitScale) {
  const auto s0 = sampler(KernelFamily::Matern12, 20, 0.1);
  const auto s1 = sampler(KernelFamily::Matern52, 20, 0.1);
  const SampleBank b = build_sample_bank(s0, s1, 500, SummaryStat::acf({1, 2}), 8, true);
  Eigen::MatrixXd all(2, 1000);
  all << b.h0, b.h1;
  const Eigen::VectorXd mean = all.rowwise().mean();
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 1e-12);
  for (int r = 0; r < 2; ++r) {
    const double var = (all.row(r).array() - mean[r]).square().sum() / 999.0;
    EXPECT_NEAR(var, 1.0, 1e-10);
  }
  RngStream rng(1, 1);
  const Eigen::VectorXd z = s0.sample(rng);
  const Eigen::VectorXd raw = b.summary.apply(z);
  EXPECT_LE((b.project(z) - (raw - b.center).cwiseQuotient(b.scale)).norm(), 1e-15);
}

TEST(Nlrt, StatisticFavoursTrueHypothesis) {
  const auto s0 = sampler(KernelFamily::Matern12, 64, 0.1);
  const auto s1 = sampler(KernelFamily::Matern52, 64, 0.1);
  const NlrtDetector det(build_sample_bank(s0, s1, 3000, SummaryStat::acf({1, 2, 3, 4}), 9), Distance::Euclidean,
                         0.1, 0.1);
  RngStream rng(10, 0);
  double l0 = 0.0, l1 = 0.0;
  for (int i = 0; i < 100; ++i) {
    l0 += std::log(det.statistic(s0.sample(rng)));
    l1 += std::log(det.statistic(s1.sample(rng)));
  }
  EXPECT_GT(l0, l1);
}
