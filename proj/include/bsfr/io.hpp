#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bsfr/calibration.hpp"
#include "bsfr/kernels.hpp"
#include "bsfr/nlrt.hpp"
#include "bsfr/sblue.hpp"
#include "bsfr/wgplrt.hpp"

namespace bsfr {

/// %.9g, the format of every float written to disk.
std::string format_number(double x);

/// Row-oriented CSV file. Cells are written as given; no quoting is applied, so
/// cells must not contain commas or newlines.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  /// Flushes the buffered rows to disk.
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(long x);
  CsvWriter& cell(int x) { return cell(static_cast<long>(x)); }
  void end_row();
  /// Writes the file; throws Error on I/O failure.
  void close();

 private:
  std::string path_;
  std::string buffer_;
  std::size_t columns_ = 0;
  std::size_t filled_ = 0;
  bool open_row_ = false;
  bool closed_ = false;
};

/// Creates the directory and its parents if needed.
void ensure_directory(const std::string& path);

/// (x, y, value) rows.
void write_field_csv(const std::string& path, const std::vector<Point2>& points,
                     const Eigen::VectorXd& values);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal SVG line plot with axes, tick labels and a legend.
void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<Series>& series);

/// Heat map of values at scattered lattice points; each point is drawn as a cell
/// of the given size. Sensor locations, if any, are overlaid as dots.
void write_heatmap_svg(const std::string& path, const std::string& title,
                       const std::vector<Point2>& points, const Eigen::VectorXd& values,
                       double cell_width, double cell_height,
                       const std::vector<Point2>& sensors = {});

/// Calibrated test: the threshold, its channel and the ROC of the draws.
struct CalibrationResult {
  TestKind kind = TestKind::WGPLRT;
  int replicates = 0;
  std::uint64_t seed = 0;
  double alpha = 0.1;
  double threshold = 0.0;
  TransitionMatrix transition;
  RocCurve roc;
};

nlohmann::json to_json(const CalibrationResult& c);
CalibrationResult calibration_from_json(const nlohmann::json& j);
void save_calibration(const std::string& path, const CalibrationResult& c);
CalibrationResult load_calibration(const std::string& path);

/// JSON artifacts for reuse across runs. Doubles are written in shortest
/// round-trip form, so a load reproduces the saved values exactly.
nlohmann::json to_json(const LaplaceCache& cache);
LaplaceCache laplace_cache_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SampleBank& bank);
SampleBank sample_bank_from_json(const nlohmann::json& j);
/// The Cholesky factor of Cov[yhat] is recomputed on load.
nlohmann::json to_json(const SBlueOffline& offline);
SBlueOffline sblue_offline_from_json(const nlohmann::json& j);

void save_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json load_json(const std::string& path);

/// Reads "sensor_id,bit" rows (header required). Sensor ids must cover
/// 0..count-1 exactly once.
Eigen::VectorXi read_decisions_csv(const std::string& path, int count);

}  // namespace bsfr
