#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>
#include <boost/random/normal_distribution.hpp>

namespace bsfr {

std::uint64_t splitmix64(std::uint64_t x);

/// Folds an ordered list of integers into a single stream id.
std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts);

/// Tags that keep the stream ids of different consumers disjoint.
enum class StreamTag : std::uint64_t {
  kSpatial = 1,
  kPointSensor = 2,
  kIntegralSensor = 3,
  kBank = 4,
  kCalibration = 5,
  kPlacement = 6,
  kLaplaceRestart = 7,
  kKnnFolds = 8,
  kTest = 99,
};

std::uint64_t stream_key(StreamTag tag, std::initializer_list<std::uint64_t> parts);

/// Reproducible random stream keyed by (seed, stream_id).
///
/// Two streams built from the same pair produce the same sequence on every run
/// and independently of how work is scheduled across threads. The generator is
/// a Mersenne Twister seeded through std::seed_seq (both fully specified by the
/// standard) and normals come from the Boost ziggurat sampler, so sequences do
/// not depend on the standard library implementation.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  double normal();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  void fill_normal(Eigen::Ref<Eigen::VectorXd> out);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace bsfr
