#include "bsfr/field_model.hpp"

#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "bsfr/errors.hpp"

namespace bsfr {

std::vector<Point2> SensorScene::sensors() const {
  std::vector<Point2> out(p_sensors);
  out.insert(out.end(), i_sensors.begin(), i_sensors.end());
  return out;
}

std::vector<Point2> SensorScene::all_locations() const {
  std::vector<Point2> out(grid);
  out.insert(out.end(), p_sensors.begin(), p_sensors.end());
  out.insert(out.end(), i_sensors.begin(), i_sensors.end());
  return out;
}

std::vector<double> SensorScene::point_times() const {
  return linspace(0.0, horizon, point_count);
}

void SensorScene::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("scene: " + what); };
  if (sensor_count() < 1) fail("at least one sensor is required");
  if (point_count < 1) fail("M must be at least 1");
  if (interval_count < 1) fail("K must be at least 1");
  if (!(horizon > 0.0)) fail("T must be positive");
  if (!(sigma_p > 0.0) || !(sigma_i > 0.0)) fail("noise standard deviations must be positive");
  if (substeps < 2) fail("quadrature substeps must be at least 2");
  if (h0.kernel.scale() != 1.0 || h1.kernel.scale() != 1.0) {
    fail("temporal kernels must have unit scale");
  }
  std::set<std::pair<double, double>> sensor_set;
  for (const Point2& p : sensors()) sensor_set.insert({p.x, p.y});
  for (const Point2& q : grid) {
    if (sensor_set.count({q.x, q.y}) != 0) fail("a query point coincides with a sensor");
  }
}

std::vector<Point2> make_grid(double x0, double x1, double y0, double y1, int nx, int ny) {
  const std::vector<double> xs = linspace(x0, x1, nx);
  const std::vector<double> ys = linspace(y0, y1, ny);
  std::vector<Point2> out;
  out.reserve(xs.size() * ys.size());
  for (double y : ys) {
    for (double x : xs) out.push_back({x, y});
  }
  return out;
}

Placement place_sensors_random(const std::vector<Point2>& lattice, int n_p, int n_i,
                               RngStream& rng) {
  if (n_p < 0 || n_i < 0) throw ConfigError("sensor counts must be nonnegative");
  const std::size_t need = static_cast<std::size_t>(n_p) + static_cast<std::size_t>(n_i);
  if (need > lattice.size()) throw ConfigError("more sensors requested than lattice points");
  std::vector<std::size_t> idx(lattice.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `need` entries are a uniform sample.
  for (std::size_t i = 0; i < need; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<bool> taken(lattice.size(), false);
  Placement out;
  for (std::size_t i = 0; i < need; ++i) {
    taken[idx[i]] = true;
    (i < static_cast<std::size_t>(n_p) ? out.p_sensors : out.i_sensors).push_back(lattice[idx[i]]);
  }
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    if (!taken[i]) out.queries.push_back(lattice[i]);
  }
  return out;
}

namespace {

MvnSpec spatial_spec(const SensorScene& scene) {
  const std::vector<Point2> locs = scene.all_locations();
  return MvnSpec::from_covariance(
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(locs.size()), scene.spatial_mean),
      gram(scene.spatial_kernel, locs));
}

}  // namespace

FieldSimulator::FieldSimulator(SensorScene scene)
    : scene_((scene.validate(), std::move(scene))),
      spatial_(spatial_spec(scene_)),
      point0_(scene_.h0, scene_.point_times(), scene_.sigma_p),
      point1_(scene_.h1, scene_.point_times(), scene_.sigma_p),
      integral0_(scene_.h0, scene_.horizon, scene_.interval_count, scene_.sigma_i, scene_.substeps),
      integral1_(scene_.h1, scene_.horizon, scene_.interval_count, scene_.sigma_i,
                 scene_.substeps) {}

std::pair<Eigen::VectorXd, Eigen::VectorXi> FieldSimulator::sample_spatial(RngStream& rng) const {
  Eigen::VectorXd g = mvn_sample(spatial_, rng);
  Eigen::VectorXi y(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) y(i) = scene_.threshold.apply(g(i));
  return {std::move(g), std::move(y)};
}

Eigen::VectorXd FieldSimulator::sample_point(int label, RngStream& rng) const {
  return point_sampler(label).sample(rng);
}

Eigen::VectorXd FieldSimulator::sample_integral(int label, RngStream& rng) const {
  return integral_sampler(label).sample(rng);
}

Realization FieldSimulator::realize(std::uint64_t seed, std::uint64_t index) const {
  Realization out;
  RngStream spatial_rng(seed, stream_key(StreamTag::kSpatial, {index}));
  auto [g, y] = sample_spatial(spatial_rng);
  out.g = std::move(g);
  out.y = std::move(y);
  out.query_count = static_cast<Eigen::Index>(scene_.grid.size());

  const auto np = static_cast<Eigen::Index>(scene_.p_sensors.size());
  const auto ni = static_cast<Eigen::Index>(scene_.i_sensors.size());
  out.point_obs.resize(np, scene_.point_count);
  out.integral_obs.resize(ni, scene_.interval_count);
  for (Eigen::Index n = 0; n < np; ++n) {
    const int label = out.y(out.query_count + n);
    RngStream rng(seed, stream_key(StreamTag::kPointSensor, {index, static_cast<std::uint64_t>(n)}));
    out.point_obs.row(n) = sample_point(label, rng).transpose();
  }
  for (Eigen::Index n = 0; n < ni; ++n) {
    const int label = out.y(out.query_count + np + n);
    RngStream rng(seed,
                  stream_key(StreamTag::kIntegralSensor, {index, static_cast<std::uint64_t>(n)}));
    out.integral_obs.row(n) = sample_integral(label, rng).transpose();
  }
  return out;
}

}  // namespace bsfr
