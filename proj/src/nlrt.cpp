#include "bsfr/nlrt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsfr/errors.hpp"
#include "bsfr/parallel.hpp"
#include "bsfr/rng.hpp"

namespace bsfr {

SummaryStat SummaryStat::acf(std::vector<int> lags) {
  if (lags.empty()) throw ConfigError("ACF summary needs at least one lag");
  for (int lag : lags) {
    if (lag < 1) throw ConfigError("ACF lags must be positive");
  }
  SummaryStat s;
  s.kind_ = Kind::ACF;
  s.lags_ = std::move(lags);
  return s;
}

SummaryStat SummaryStat::moments(std::vector<Moment> which) {
  if (which.empty()) throw ConfigError("moment summary needs at least one moment");
  SummaryStat s;
  s.kind_ = Kind::Moments;
  s.moments_ = std::move(which);
  return s;
}

SummaryStat SummaryStat::concat(std::vector<SummaryStat> parts) {
  if (parts.empty()) throw ConfigError("concatenated summary needs at least one part");
  SummaryStat s;
  s.kind_ = Kind::Concat;
  s.parts_ = std::move(parts);
  return s;
}

Eigen::Index SummaryStat::dimension() const {
  switch (kind_) {
    case Kind::ACF:
      return static_cast<Eigen::Index>(lags_.size());
    case Kind::Moments:
      return static_cast<Eigen::Index>(moments_.size());
    case Kind::Concat: {
      Eigen::Index d = 0;
      for (const auto& p : parts_) d += p.dimension();
      return d;
    }
  }
  return 0;
}

Eigen::Index SummaryStat::min_length() const {
  switch (kind_) {
    case Kind::ACF:
      return *std::max_element(lags_.begin(), lags_.end()) + 1;
    case Kind::Moments:
      return 1;
    case Kind::Concat: {
      Eigen::Index n = 1;
      for (const auto& p : parts_) n = std::max(n, p.min_length());
      return n;
    }
  }
  return 1;
}

Eigen::VectorXd SummaryStat::apply(const Eigen::VectorXd& z) const {
  switch (kind_) {
    case Kind::ACF:
      return summary_acf(z, lags_);
    case Kind::Moments:
      return summary_moments(z, moments_);
    case Kind::Concat: {
      Eigen::VectorXd out(dimension());
      Eigen::Index at = 0;
      for (const auto& p : parts_) {
        const Eigen::VectorXd piece = p.apply(z);
        out.segment(at, piece.size()) = piece;
        at += piece.size();
      }
      return out;
    }
  }
  return {};
}

std::string SummaryStat::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::ACF:
      out << "acf(";
      for (std::size_t i = 0; i < lags_.size(); ++i) out << (i ? "," : "") << lags_[i];
      out << ")";
      break;
    case Kind::Moments:
      out << "moments(";
      for (std::size_t i = 0; i < moments_.size(); ++i) {
        out << (i ? "," : "") << to_string(moments_[i]);
      }
      out << ")";
      break;
    case Kind::Concat:
      out << "concat(";
      for (std::size_t i = 0; i < parts_.size(); ++i) out << (i ? "," : "") << parts_[i].describe();
      out << ")";
      break;
  }
  return out.str();
}

Eigen::VectorXd summary_acf(const Eigen::VectorXd& z, const std::vector<int>& lags) {
  const Eigen::Index k = z.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lags.size()));
  for (int lag : lags) {
    if (lag < 1 || lag >= k) throw DomainError("summary_acf: series too short for the lag");
  }
  const Eigen::VectorXd c = z.array() - z.mean();
  const double denom = c.squaredNorm();
  if (denom == 0.0) return out;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const Eigen::Index tau = lags[i];
    out(static_cast<Eigen::Index>(i)) = c.head(k - tau).dot(c.tail(k - tau)) / denom;
  }
  return out;
}

Eigen::VectorXd summary_moments(const Eigen::VectorXd& z, const std::vector<Moment>& which) {
  if (z.size() == 0) throw DomainError("summary_moments: empty series");
  const double n = static_cast<double>(z.size());
  const double mean = z.mean();
  const Eigen::ArrayXd c = z.array() - mean;
  const double m2 = c.square().sum() / n;
  const double m3 = c.cube().sum() / n;
  const double m4 = c.square().square().sum() / n;
  Eigen::VectorXd out(static_cast<Eigen::Index>(which.size()));
  for (std::size_t i = 0; i < which.size(); ++i) {
    double v = 0.0;
    switch (which[i]) {
      case Moment::Mean:
        v = mean;
        break;
      case Moment::Variance:
        v = m2;
        break;
      case Moment::Skewness:
        v = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
        break;
      case Moment::Kurtosis:
        v = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
        break;
    }
    out(static_cast<Eigen::Index>(i)) = v;
  }
  return out;
}

std::string to_string(Distance d) {
  switch (d) {
    case Distance::Euclidean:
      return "euclidean";
    case Distance::Manhattan:
      return "manhattan";
    case Distance::Chebyshev:
      return "chebyshev";
  }
  return "euclidean";
}

Distance distance_from_string(const std::string& name) {
  if (name == "euclidean") return Distance::Euclidean;
  if (name == "manhattan") return Distance::Manhattan;
  if (name == "chebyshev") return Distance::Chebyshev;
  throw ConfigError("unknown distance '" + name + "'");
}

std::string to_string(Moment m) {
  switch (m) {
    case Moment::Mean:
      return "mean";
    case Moment::Variance:
      return "variance";
    case Moment::Skewness:
      return "skewness";
    case Moment::Kurtosis:
      return "kurtosis";
  }
  return "mean";
}

Moment moment_from_string(const std::string& name) {
  if (name == "mean") return Moment::Mean;
  if (name == "variance") return Moment::Variance;
  if (name == "skewness") return Moment::Skewness;
  if (name == "kurtosis") return Moment::Kurtosis;
  throw ConfigError("unknown moment '" + name + "'");
}

Eigen::VectorXd SampleBank::project(const Eigen::VectorXd& z) const {
  Eigen::VectorXd s = summary.apply(z);
  if (s.size() != dimension()) throw DomainError("summary dimension does not match the bank");
  if (standardized) s = (s - center).cwiseQuotient(scale);
  return s;
}

Eigen::MatrixXd build_bank(const IntegralSampler& sampler, int hypothesis, int count,
                           const SummaryStat& summary, std::uint64_t seed, int threads) {
  if (count < 1) throw ConfigError("bank size J must be at least 1");
  if (sampler.intervals() < summary.min_length()) {
    throw ConfigError("summary statistic needs more intervals than K");
  }
  Eigen::MatrixXd out(summary.dimension(), count);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t j) {
    RngStream rng(seed, stream_key(StreamTag::kBank, {static_cast<std::uint64_t>(hypothesis), j}));
    out.col(static_cast<Eigen::Index>(j)) = summary.apply(sampler.sample(rng));
  });
  return out;
}

SampleBank build_sample_bank(const IntegralSampler& sampler0, const IntegralSampler& sampler1,
                             int count, const SummaryStat& summary, std::uint64_t seed,
                             bool standardize, int threads) {
  SampleBank bank;
  bank.summary = summary;
  bank.seed = seed;
  bank.h0 = build_bank(sampler0, 0, count, summary, seed, threads);
  bank.h1 = build_bank(sampler1, 1, count, summary, seed, threads);
  if (standardize) {
    const Eigen::Index l = bank.dimension();
    const double n = 2.0 * static_cast<double>(count);
    bank.center = (bank.h0.rowwise().sum() + bank.h1.rowwise().sum()) / n;
    bank.scale.resize(l);
    for (Eigen::Index r = 0; r < l; ++r) {
      const double ss = (bank.h0.row(r).array() - bank.center(r)).square().sum() +
                        (bank.h1.row(r).array() - bank.center(r)).square().sum();
      const double sd = std::sqrt(ss / std::max(1.0, n - 1.0));
      bank.scale(r) = sd > 0.0 ? sd : 1.0;
    }
    bank.h0 = (bank.h0.colwise() - bank.center).array().colwise() / bank.scale.array();
    bank.h1 = (bank.h1.colwise() - bank.center).array().colwise() / bank.scale.array();
    bank.standardized = true;
  }
  return bank;
}

namespace {

long count_within(const Eigen::MatrixXd& entries, const Eigen::VectorXd& s, Distance distance,
                  double delta) {
  const Eigen::Index l = entries.rows();
  const Eigen::Index j = entries.cols();
  const double* data = entries.data();
  long n = 0;
  switch (distance) {
    case Distance::Euclidean: {
      const double d2 = delta * delta;
      for (Eigen::Index c = 0; c < j; ++c) {
        const double* col = data + c * l;
        double acc = 0.0;
        for (Eigen::Index r = 0; r < l; ++r) {
          const double e = col[r] - s(r);
          acc += e * e;
        }
        n += acc <= d2;
      }
      break;
    }
    case Distance::Manhattan:
      for (Eigen::Index c = 0; c < j; ++c) {
        const double* col = data + c * l;
        double acc = 0.0;
        for (Eigen::Index r = 0; r < l; ++r) acc += std::abs(col[r] - s(r));
        n += acc <= delta;
      }
      break;
    case Distance::Chebyshev:
      for (Eigen::Index c = 0; c < j; ++c) {
        const double* col = data + c * l;
        double acc = 0.0;
        for (Eigen::Index r = 0; r < l; ++r) acc = std::max(acc, std::abs(col[r] - s(r)));
        n += acc <= delta;
      }
      break;
  }
  return n;
}

}  // namespace

NlrtCounts nlrt_counts(const SampleBank& bank, const Eigen::VectorXd& s, Distance distance,
                       double delta) {
  if (s.size() != bank.dimension()) throw DomainError("summary dimension does not match the bank");
  if (!(delta > 0.0)) throw DomainError("NLRT tolerance delta must be positive");
  return {count_within(bank.h0, s, distance, delta), count_within(bank.h1, s, distance, delta)};
}

double nlrt_statistic(const SampleBank& bank, const Eigen::VectorXd& z, Distance distance,
                      double delta, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("NLRT smoothing epsilon must be positive");
  return nlrt_ratio(nlrt_counts(bank, bank.project(z), distance, delta), epsilon);
}

NlrtDetector::NlrtDetector(SampleBank bank, Distance distance, double delta, double epsilon)
    : bank_(std::move(bank)), distance_(distance), delta_(delta), epsilon_(epsilon) {
  if (!(delta_ > 0.0) || !(epsilon_ > 0.0)) {
    throw ConfigError("NLRT needs delta > 0 and epsilon > 0");
  }
}

double NlrtDetector::statistic(const Eigen::VectorXd& z) const {
  return nlrt_statistic(bank_, z, distance_, delta_, epsilon_);
}

}  // namespace bsfr
