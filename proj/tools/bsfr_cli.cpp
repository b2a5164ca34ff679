// Command-line harness: calibration, simulation, reconstruction and experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bsfr/config.hpp"
#include "bsfr/errors.hpp"
#include "bsfr/io.hpp"
#include "bsfr/pipeline.hpp"

namespace {

using namespace bsfr;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string config_path;
  std::string preset;
  std::optional<std::string> out;
};

ExperimentConfig resolve(const Globals& g) {
  nlohmann::json doc = nlohmann::json::object();
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw ConfigError("cannot open configuration file " + g.config_path);
    try {
      doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("cannot parse " + g.config_path + ": " + e.what());
    }
  }
  if (!g.preset.empty()) doc["preset"] = g.preset;
  if (doc.empty()) throw ConfigError("give --config <path> or --preset <name>");
  ExperimentConfig cfg = parse_config(doc);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.out) cfg.output_dir = *g.out;
  return cfg;
}

void print_calibration(const CalibrationResult& c) {
  std::printf("%-6s threshold %s  U = [[%s, %s], [%s, %s]]  AUC %s  (R = %d)\n", to_string(c.kind).c_str(),
              format_number(c.threshold).c_str(), format_number(c.transition.p00).c_str(),
              format_number(c.transition.p01).c_str(), format_number(c.transition.p10).c_str(),
              format_number(c.transition.p11).c_str(), format_number(c.roc.auc).c_str(), c.replicates);
}

void write_calibrations(const ExperimentConfig& cfg, const CalibratedTests& tests) {
  ensure_directory(cfg.output_dir);
  CsvWriter roc_csv(cfg.output_dir + "/roc.csv", {"test", "fpr", "tpr"});
  std::vector<Series> curves;
  save_tests(cfg.output_dir, tests);
  for (const auto* c : {&tests.point, &tests.integral}) {
    if (!*c) continue;
    Series s{to_string((*c)->kind), {}, {}};
    for (const auto& p : (*c)->roc.points) {
      roc_csv.cell(to_string((*c)->kind)).cell(p.fpr).cell(p.tpr).end_row();
      s.x.push_back(p.fpr);
      s.y.push_back(p.tpr);
    }
    curves.push_back(std::move(s));
    print_calibration(**c);
  }
  roc_csv.close();
  write_line_plot_svg(cfg.output_dir + "/roc.svg", "ROC of the local tests", "false positive rate",
                      "true positive rate", curves);
}

CalibratedTests tests_for(const ExperimentConfig& cfg, const FieldSimulator& sim,
                          const std::string& calibration_dir) {
  if (!calibration_dir.empty()) return load_tests(cfg, sim, calibration_dir);
  return calibrate_tests(cfg, sim);
}

int cmd_calibrate(const Globals& g) {
  const ExperimentConfig cfg = resolve(g);
  const FieldSimulator sim(build_scene(cfg));
  write_calibrations(cfg, calibrate_tests(cfg, sim));
  return 0;
}

int cmd_simulate(const Globals& g, std::uint64_t index, const std::string& calibration_dir) {
  const ExperimentConfig cfg = resolve(g);
  const FieldSimulator sim(build_scene(cfg));
  const SensorScene& scene = sim.scene();
  const CalibratedTests tests = tests_for(cfg, sim, calibration_dir);
  const Realization real = sim.realize(cfg.seed, index);
  const Eigen::VectorXi decisions = sensor_decisions(scene, tests, real);
  ensure_directory(cfg.output_dir);
  const auto q = static_cast<Eigen::Index>(scene.grid.size());
  write_field_csv(cfg.output_dir + "/field_true.csv", scene.grid, real.query_labels().cast<double>());
  write_field_csv(cfg.output_dir + "/field_latent.csv", scene.grid, real.g.head(q));

  const auto sensors = scene.sensors();
  const Eigen::VectorXi labels = real.sensor_labels();
  const auto np = static_cast<Eigen::Index>(scene.p_sensors.size());
  CsvWriter dec(cfg.output_dir + "/decisions.csv", {"sensor_id", "bit", "kind", "x", "y", "label"});
  for (Eigen::Index n = 0; n < decisions.size(); ++n) {
    const auto& p = sensors[static_cast<std::size_t>(n)];
    dec.cell(static_cast<long>(n)).cell(decisions[n]).cell(n < np ? "point" : "integral");
    dec.cell(p.x).cell(p.y).cell(labels[n]).end_row();
  }
  dec.close();
  CsvWriter obs(cfg.output_dir + "/observations.csv", {"sensor_id", "kind", "step", "value"});
  for (Eigen::Index n = 0; n < real.point_obs.rows(); ++n) {
    for (Eigen::Index m = 0; m < real.point_obs.cols(); ++m) {
      obs.cell(static_cast<long>(n)).cell("point").cell(static_cast<long>(m)).cell(real.point_obs(n, m)).end_row();
    }
  }
  for (Eigen::Index n = 0; n < real.integral_obs.rows(); ++n) {
    for (Eigen::Index k = 0; k < real.integral_obs.cols(); ++k) {
      obs.cell(static_cast<long>(np + n)).cell("integral").cell(static_cast<long>(k));
      obs.cell(real.integral_obs(n, k)).end_row();
    }
  }
  obs.close();
  std::printf("realization %llu: %lld query points, %d sensors, %lld positive decisions\n",
              static_cast<unsigned long long>(index), static_cast<long long>(q), scene.sensor_count(),
              static_cast<long long>(decisions.sum()));
  return 0;
}

int cmd_reconstruct(const Globals& g, const std::string& decisions_path, const std::string& calibration_dir) {
  const ExperimentConfig cfg = resolve(g);
  const FieldSimulator sim(build_scene(cfg));
  const SensorScene& scene = sim.scene();
  CalibratedTests tests;
  const bool overridden = (scene.p_sensors.empty() || cfg.transitions.point) &&
                          (scene.i_sensors.empty() || cfg.transitions.integral);
  if (!overridden) tests = tests_for(cfg, sim, calibration_dir);
  const auto sensors = scene.sensors();
  const SBlueOffline offline =
      sblue_offline(sensors, scene.grid, spatial_prior(scene), sensor_channels(cfg, scene, tests), cfg.diagonal);
  const Eigen::VectorXi decisions = read_decisions_csv(decisions_path, scene.sensor_count());
  const Prediction pred = sblue_predict(offline, decisions);
  ensure_directory(cfg.output_dir);
  write_field_csv(cfg.output_dir + "/field_pred.csv", scene.grid, pred.y_hat.cast<double>());
  write_field_csv(cfg.output_dir + "/field_estimate.csv", scene.grid, pred.g_hat);
  write_field_csv(cfg.output_dir + "/risk.csv", scene.grid, offline.bayes_risk);
  const auto& d = cfg.scene.domain;
  const double cw = d.nx > 1 ? (d.x1 - d.x0) / (d.nx - 1) : 1.0;
  const double ch = d.ny > 1 ? (d.y1 - d.y0) / (d.ny - 1) : 1.0;
  write_heatmap_svg(cfg.output_dir + "/field_pred.svg", "S-BLUE reconstruction", scene.grid,
                    pred.y_hat.cast<double>(), cw, ch, sensors);
  write_heatmap_svg(cfg.output_dir + "/risk.svg", "Bayes risk of the S-BLUE", scene.grid, offline.bayes_risk, cw,
                    ch, sensors);
  std::printf("reconstructed %zu query points, %lld predicted positive, mean Bayes risk %s\n", scene.grid.size(),
              static_cast<long long>(pred.y_hat.sum()), format_number(offline.bayes_risk.mean()).c_str());
  return 0;
}

int cmd_roc(const Globals& g) {
  const ExperimentConfig cfg = resolve(g);
  const FieldSimulator sim(build_scene(cfg));
  write_calibrations(cfg, calibrate_tests(cfg, sim));
  std::printf("wrote %s/roc.csv and %s/roc.svg\n", cfg.output_dir.c_str(), cfg.output_dir.c_str());
  return 0;
}

int cmd_experiment(const Globals& g) {
  const ExperimentConfig cfg = resolve(g);
  const PipelineResult res = run_pipeline(cfg);
  for (const auto* c : {&res.tests.point, &res.tests.integral}) {
    if (*c) print_calibration(**c);
  }
  std::printf("%-8s %6s %10s %10s %10s %10s\n", "method", "runs", "MSE", "F1", "FPR", "TPR");
  for (const auto& m : res.rows) {
    std::printf("%-8s %6d %10.4f %10.4f %10.4f %10.4f\n", to_string(m.algorithm).c_str(), m.realizations, m.mse,
                m.f1, m.fpr, m.tpr);
  }
  if (res.metric_warnings > 0) {
    std::fprintf(stderr, "warning: %d undefined metric ratios were reported as 0\n", res.metric_warnings);
  }
  std::printf("outputs written to %s\n", cfg.output_dir.c_str());
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& axis, const std::vector<double>& values, const std::string& mode) {
  ExperimentConfig cfg = resolve(g);
  if (!axis.empty() || !values.empty() || !mode.empty()) {
    SweepSpec sw = cfg.sweep.value_or(SweepSpec{});
    if (!axis.empty()) sw.axis = sweep_axis_from_string(axis);
    if (!values.empty()) sw.values = values;
    if (!mode.empty()) {
      if (mode != "roc" && mode != "pipeline") throw ConfigError("--mode must be roc or pipeline");
      sw.mode = mode;
    }
    if (sw.values.empty()) throw ConfigError("the sweep has no values");
    cfg.sweep = sw;
  }
  const auto rows = run_sweep(cfg);
  std::printf("%-12s %-16s %12s %12s\n", to_string(cfg.sweep->axis).c_str(), "metric", "mean", "stderr");
  for (const auto& r : rows) {
    std::printf("%-12s %-16s %12.6f %12.6f\n", format_number(r.axis_value).c_str(), r.metric.c_str(), r.mean,
                r.stderr_);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary spatial field reconstruction from local likelihood-ratio decisions"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed for scenes and realizations");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--preset", g.preset, "Preset name (exp1_synthetic, exp2_sensitivity, nea_fitted)");
  app.fallthrough();

  std::string calibration_dir;
  std::string decisions_path;
  std::uint64_t index = 0;
  std::string axis, mode;
  std::vector<double> values;

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate thresholds and transition matrices");
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one realization and its sensor decisions");
  simulate_cmd->add_option("--index", index, "Realization index");
  simulate_cmd->add_option("--calibration", calibration_dir, "Directory with saved calibration files");
  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "S-BLUE reconstruction from a decisions file");
  reconstruct_cmd->add_option("--decisions", decisions_path, "CSV with sensor_id,bit rows")->required();
  reconstruct_cmd->add_option("--calibration", calibration_dir, "Directory with saved calibration files");
  auto* roc_cmd = app.add_subcommand("roc", "ROC curves and AUC of the local tests");
  auto* experiment_cmd = app.add_subcommand("experiment", "Run the full pipeline with baselines");
  auto* sweep_cmd = app.add_subcommand("sweep", "Sensitivity sweep over one parameter");
  sweep_cmd->add_option("--axis", axis, "noise_sigma, K_intervals, M_points or alpha");
  sweep_cmd->add_option("--values", values, "Values of the swept parameter")->delimiter(',');
  sweep_cmd->add_option("--mode", mode, "roc or pipeline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*calibrate_cmd) return cmd_calibrate(g);
    if (*simulate_cmd) return cmd_simulate(g, index, calibration_dir);
    if (*reconstruct_cmd) return cmd_reconstruct(g, decisions_path, calibration_dir);
    if (*roc_cmd) return cmd_roc(g);
    if (*experiment_cmd) return cmd_experiment(g);
    if (*sweep_cmd) return cmd_sweep(g, axis, values, mode);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
