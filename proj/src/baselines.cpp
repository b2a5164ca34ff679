#include "bsfr/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "bsfr/errors.hpp"
#include "bsfr/rng.hpp"

namespace bsfr {

OracleRegressor::OracleRegressor(const std::vector<Point2>& sensors,
                                 const std::vector<Point2>& queries, const SpatialPrior& prior)
    : prior_(prior),
      chol_(chol_with_jitter(gram(prior.kernel, sensors))),
      cross_(cross_gram(prior.kernel, queries, sensors)) {}

Prediction OracleRegressor::predict(const Eigen::VectorXd& sensor_latent) const {
  if (sensor_latent.size() != chol_.size()) throw DomainError("oracle: sensor count mismatch");
  const Eigen::VectorXd alpha =
      chol_.solve(Eigen::VectorXd(sensor_latent.array() - prior_.mean));
  Prediction p;
  p.g_hat = (cross_ * alpha).array() + prior_.mean;
  p.y_hat.resize(p.g_hat.size());
  for (Eigen::Index i = 0; i < p.g_hat.size(); ++i) p.y_hat(i) = p.g_hat(i) >= prior_.c ? 1 : 0;
  return p;
}

namespace {

int vote(const Eigen::VectorXi& decisions, const std::vector<Point2>& sensors,
         const std::vector<std::size_t>& pool, const Point2& q, int k,
         std::vector<std::pair<double, std::size_t>>& scratch) {
  scratch.clear();
  for (std::size_t idx : pool) scratch.emplace_back(distance(sensors[idx], q), idx);
  const auto kk = static_cast<std::ptrdiff_t>(k);
  std::partial_sort(scratch.begin(), scratch.begin() + kk, scratch.end());
  int ones = 0;
  for (std::ptrdiff_t i = 0; i < kk; ++i) ones += decisions(static_cast<Eigen::Index>(scratch[i].second));
  return 2 * ones >= k ? 1 : 0;
}

}  // namespace

Eigen::VectorXi knn_predict(const Eigen::VectorXi& decisions, const std::vector<Point2>& sensors,
                            const std::vector<Point2>& queries, int k) {
  if (decisions.size() != static_cast<Eigen::Index>(sensors.size())) {
    throw DomainError("knn: decision count does not match the sensor count");
  }
  if (k < 1 || static_cast<std::size_t>(k) > sensors.size()) {
    throw DomainError("knn: k must lie in [1, number of sensors]");
  }
  std::vector<std::size_t> pool(sensors.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::pair<double, std::size_t>> scratch;
  Eigen::VectorXi out(static_cast<Eigen::Index>(queries.size()));
  for (std::size_t q = 0; q < queries.size(); ++q) {
    out(static_cast<Eigen::Index>(q)) = vote(decisions, sensors, pool, queries[q], k, scratch);
  }
  return out;
}

KnnResult knn_baseline(const Eigen::VectorXi& decisions, const std::vector<Point2>& sensors,
                       const std::vector<Point2>& queries, const std::vector<int>& k_grid,
                       int folds, std::uint64_t seed, std::uint64_t index) {
  if (k_grid.empty()) throw ConfigError("knn: empty k grid");
  const std::size_t n = sensors.size();
  if (folds < 2 || static_cast<std::size_t>(folds) > n) {
    throw DomainError("knn: fold count must lie in [2, number of sensors]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed, stream_key(StreamTag::kKnnFolds, {index}));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
  }
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));

  const std::size_t smallest_train = n - (n + static_cast<std::size_t>(folds) - 1) / static_cast<std::size_t>(folds);
  for (int k : k_grid) {
    if (k < 1 || static_cast<std::size_t>(k) > smallest_train) {
      throw DomainError("knn: k exceeds the number of training sensors in a fold");
    }
  }

  std::vector<std::pair<double, std::size_t>> scratch;
  int best_k = k_grid.front();
  long best_err = std::numeric_limits<long>::max();
  for (int k : k_grid) {
    long err = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] != f) pool.push_back(i);
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] != f) continue;
        err += vote(decisions, sensors, pool, sensors[i], k, scratch) != decisions(static_cast<Eigen::Index>(i));
      }
    }
    if (err < best_err || (err == best_err && k < best_k)) {
      best_err = err;
      best_k = k;
    }
  }
  return {knn_predict(decisions, sensors, queries, best_k), best_k};
}

}  // namespace bsfr
