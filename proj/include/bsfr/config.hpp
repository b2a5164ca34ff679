#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsfr/calibration.hpp"
#include "bsfr/field_model.hpp"
#include "bsfr/nlrt.hpp"
#include "bsfr/sblue.hpp"

namespace bsfr {

struct DomainSpec {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 10, ny = 10;
};

struct SensorSpec {
  enum class Placement { Random, Explicit };
  Placement placement = Placement::Random;
  int n_point = 0;
  int n_integral = 0;
  std::vector<Point2> point;     // explicit placement
  std::vector<Point2> integral;  // explicit placement
};

struct SceneSpec {
  DomainSpec domain;
  SensorSpec sensors;
  CovKernel spatial_kernel{KernelFamily::SquaredExponential, 1.0, 1.0};
  double spatial_mean = 0.0;
  std::optional<double> pi;  // exactly one of pi / c
  std::optional<double> c;
  TemporalModel h0;
  TemporalModel h1;
  double horizon = 1.0;
  int M = 1;
  int K = 1;
  double sigma_p = 0.1;
  double sigma_i = 0.1;
  int substeps = 50;

  double threshold_c() const;
};

struct NlrtSpec {
  int J = 10000;
  double delta = 0.1;
  double epsilon = 0.1;
  SummaryStat summary = SummaryStat::acf({1, 2, 3, 4});
  Distance distance = Distance::Euclidean;
  bool standardize = false;
};

struct BaselineSpec {
  bool oracle = true;
  bool knn = true;
  std::vector<int> k_grid{1, 3, 5, 7, 9, 11, 13, 15};
  int folds = 5;
};

/// Optional fixed channels replacing the calibrated transition matrices.
struct TransitionOverride {
  std::optional<TransitionMatrix> point;
  std::optional<TransitionMatrix> integral;
};

enum class SweepAxis { NoiseSigma, KIntervals, MPoints, Alpha };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::KIntervals;
  std::vector<double> values;
  /// "roc" re-runs calibration only; "pipeline" re-runs the full experiment.
  std::string mode = "roc";
};

struct ExperimentConfig {
  std::optional<std::string> preset;
  std::uint64_t seed = 1;
  SceneSpec scene;
  double alpha = 0.1;
  int calibration_R = 10000;
  std::uint64_t calibration_seed = 2;
  NlrtSpec nlrt;
  int realizations = 100;
  BaselineSpec baselines;
  DiagonalRule diagonal = DiagonalRule::Bernoulli;
  TransitionOverride transitions;
  std::optional<SweepSpec> sweep;
  std::string output_dir = "out";
  int threads = 1;
};

std::vector<std::string> preset_names();
/// The preset as a configuration document.
nlohmann::json preset_json(const std::string& name);

/// Applies `doc` on top of its "preset" (if any) and parses the result. Unknown
/// keys and invalid values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig preset_config(const std::string& name);

/// Canonical document for a parsed configuration (presets expanded).
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json to_json(const WarpSpec& warp);
WarpSpec warp_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CovKernel& kernel);
CovKernel kernel_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SummaryStat& s);
SummaryStat summary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TransitionMatrix& u);
TransitionMatrix transition_from_json(const nlohmann::json& j);

/// Builds the scene; random sensor placement draws from stream (kPlacement).
SensorScene build_scene(const ExperimentConfig& config);

/// FNV-1a hash of the canonical JSON of the scene section and seed.
std::string scene_hash(const ExperimentConfig& config);

}  // namespace bsfr
