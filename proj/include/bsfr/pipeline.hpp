#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bsfr/baselines.hpp"
#include "bsfr/config.hpp"
#include "bsfr/io.hpp"
#include "bsfr/metrics.hpp"

namespace bsfr {

/// Detectors and calibrations for the sensor types present in a scene.
struct CalibratedTests {
  std::optional<WgplrtDetector> wgplrt;
  std::optional<NlrtDetector> nlrt;
  std::optional<CalibrationResult> point;
  std::optional<CalibrationResult> integral;
  std::optional<StatisticSample> point_sample;
  std::optional<StatisticSample> integral_sample;
};

/// Fits the WGPLRT (if the scene has P-sensors) and builds the NLRT bank (if it
/// has I-sensors), without calibrating them.
CalibratedTests prepare_tests(const ExperimentConfig& config, const FieldSimulator& simulator);

/// Draws calibration statistics for the prepared tests and sets thresholds at
/// config.alpha.
void calibrate(const ExperimentConfig& config, const FieldSimulator& simulator, CalibratedTests& tests);

/// prepare_tests followed by calibrate.
CalibratedTests calibrate_tests(const ExperimentConfig& config, const FieldSimulator& simulator);

/// Loads calibration_wgplrt.json / calibration_nlrt.json from a directory into
/// prepared tests. Throws ConfigError if a needed file is missing.
void load_calibrations(const std::string& dir, CalibratedTests& tests);

/// Writes the calibrations, the Laplace caches (laplace_h0.json, laplace_h1.json)
/// and the NLRT bank (bank.json) of calibrated tests to a directory.
void save_tests(const std::string& dir, const CalibratedTests& tests);

/// Restores tests saved by save_tests. The bank is reused only when its scene
/// key matches the configuration; otherwise it is rebuilt.
CalibratedTests load_tests(const ExperimentConfig& config, const FieldSimulator& simulator,
                           const std::string& dir);

/// Per-sensor channels for S-BLUE: P-sensors then I-sensors, calibrated unless
/// the configuration overrides them.
std::vector<TransitionMatrix> sensor_channels(const ExperimentConfig& config,
                                              const SensorScene& scene,
                                              const CalibratedTests& tests);

/// Local LRT decisions of every sensor for one realization.
Eigen::VectorXi sensor_decisions(const SensorScene& scene, const CalibratedTests& tests,
                                 const Realization& realization);

SpatialPrior spatial_prior(const SensorScene& scene);

struct RealizationOutcome {
  Confusion sblue;
  std::optional<Confusion> oracle;
  std::optional<Confusion> knn;
  int knn_k = 0;
};

struct PipelineResult {
  SensorScene scene;
  CalibratedTests tests;
  SBlueOffline offline;
  std::vector<RealizationOutcome> outcomes;
  std::vector<MetricsRow> rows;  // S-BLUE, then Oracle and KNN when enabled
  // First realization, kept for the field plots.
  Realization example;
  Prediction example_prediction;
  int metric_warnings = 0;
};

struct PipelineOptions {
  /// Write CSV/SVG/JSON artifacts to config.output_dir.
  bool write_outputs = true;
};

PipelineResult run_pipeline(const ExperimentConfig& config, const PipelineOptions& options = {});

/// Writes metrics.csv, summary.csv, roc.csv, calibration json, the field and risk
/// CSVs and their SVG companions.
void write_pipeline_outputs(const ExperimentConfig& config, const PipelineResult& result);

/// One tidy row of a sweep.
struct SweepRow {
  double axis_value = 0.0;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Applies a single sweep value to a copy of the configuration.
ExperimentConfig apply_sweep_value(const ExperimentConfig& config, SweepAxis axis, double value);

/// Re-runs calibration (mode "roc") or the full pipeline (mode "pipeline") for
/// each value of config.sweep and writes sweep.csv and sweep.svg.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, bool write_outputs = true);

}  // namespace bsfr
