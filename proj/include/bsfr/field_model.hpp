#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bsfr/kernels.hpp"
#include "bsfr/mvn.hpp"
#include "bsfr/rng.hpp"
#include "bsfr/temporal.hpp"
#include "bsfr/warping.hpp"

namespace bsfr {

enum class SensorKind { Point, Integral };

struct SensorScene {
  std::vector<Point2> grid;  // query points (never sensor locations)
  std::vector<Point2> p_sensors;
  std::vector<Point2> i_sensors;
  CovKernel spatial_kernel{KernelFamily::SquaredExponential, 1.0, 1.0};
  double spatial_mean = 0.0;
  BernoulliThreshold threshold = BernoulliThreshold::from_c(0.0);
  TemporalModel h0{};
  TemporalModel h1{};
  double horizon = 1.0;
  int point_count = 1;      // M
  int interval_count = 1;   // K
  double sigma_p = 0.1;
  double sigma_i = 0.1;
  int substeps = 50;

  int sensor_count() const { return static_cast<int>(p_sensors.size() + i_sensors.size()); }
  /// Sensors in decision order: P-sensors first, then I-sensors.
  std::vector<Point2> sensors() const;
  /// Query points followed by sensors(); the index set of Realization::g.
  std::vector<Point2> all_locations() const;
  std::vector<double> point_times() const;

  const TemporalModel& model(int label) const { return label == 0 ? h0 : h1; }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct Realization {
  Eigen::VectorXd g;  // over SensorScene::all_locations()
  Eigen::VectorXi y;
  Eigen::MatrixXd point_obs;     // N_P x M
  Eigen::MatrixXd integral_obs;  // N_I x K

  Eigen::Index query_count = 0;

  Eigen::VectorXi query_labels() const { return y.head(query_count); }
  Eigen::VectorXi sensor_labels() const { return y.tail(y.size() - query_count); }
  Eigen::VectorXd sensor_latent() const { return g.tail(g.size() - query_count); }
};

/// Regular nx-by-ny lattice over [x0, x1] x [y0, y1], x varying fastest.
std::vector<Point2> make_grid(double x0, double x1, double y0, double y1, int nx, int ny);

struct Placement {
  std::vector<Point2> queries;
  std::vector<Point2> p_sensors;
  std::vector<Point2> i_sensors;
};

/// Picks n_p + n_i distinct lattice points uniformly at random for sensors; the
/// remaining points become the query set.
Placement place_sensors_random(const std::vector<Point2>& lattice, int n_p, int n_i,
                               RngStream& rng);

/// Owns the factorized spatial covariance and the temporal samplers of a scene.
///
/// Realization r draws the spatial field from stream (kSpatial, r) and the
/// observations of sensor n from (kPointSensor, r, n) or (kIntegralSensor, r, n),
/// so results do not depend on processing order or thread count.
class FieldSimulator {
 public:
  explicit FieldSimulator(SensorScene scene);

  const SensorScene& scene() const { return scene_; }

  /// Joint latent draw at all_locations() and its thresholded labels.
  std::pair<Eigen::VectorXd, Eigen::VectorXi> sample_spatial(RngStream& rng) const;

  Eigen::VectorXd sample_point(int label, RngStream& rng) const;
  Eigen::VectorXd sample_integral(int label, RngStream& rng) const;

  Realization realize(std::uint64_t seed, std::uint64_t index) const;

  const PointSampler& point_sampler(int label) const { return label == 0 ? point0_ : point1_; }
  const IntegralSampler& integral_sampler(int label) const {
    return label == 0 ? integral0_ : integral1_;
  }

 private:
  SensorScene scene_;
  MvnSpec spatial_;
  PointSampler point0_;
  PointSampler point1_;
  IntegralSampler integral0_;
  IntegralSampler integral1_;
};

}  // namespace bsfr
