#include "bsfr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bsfr/errors.hpp"
#include "bsfr/parallel.hpp"

namespace bsfr {

namespace {

CalibrationResult summarize(TestKind kind, const StatisticSample& sample, const ExperimentConfig& config) {
  CalibrationResult c;
  c.kind = kind;
  c.replicates = config.calibration_R;
  c.seed = config.calibration_seed;
  c.alpha = config.alpha;
  c.threshold = threshold_for_alpha(sample, config.alpha);
  c.transition = transition_matrix(sample, c.threshold);
  c.roc = roc(sample);
  return c;
}

}  // namespace

CalibratedTests prepare_tests(const ExperimentConfig& config, const FieldSimulator& simulator) {
  const SensorScene& scene = simulator.scene();
  CalibratedTests tests;
  if (!scene.p_sensors.empty()) {
    LaplaceOptions opts;
    opts.seed = config.seed;
    tests.wgplrt.emplace(scene.h0, scene.h1, scene.point_times(), scene.sigma_p, opts);
  }
  if (!scene.i_sensors.empty()) {
    SampleBank bank = build_sample_bank(simulator.integral_sampler(0), simulator.integral_sampler(1),
                                        config.nlrt.J, config.nlrt.summary, config.calibration_seed,
                                        config.nlrt.standardize, config.threads);
    bank.scene_key = scene_hash(config);
    tests.nlrt.emplace(std::move(bank), config.nlrt.distance, config.nlrt.delta, config.nlrt.epsilon);
  }
  return tests;
}

void calibrate(const ExperimentConfig& config, const FieldSimulator& simulator, CalibratedTests& tests) {
  if (tests.wgplrt) {
    tests.point_sample = sample_statistics(*tests.wgplrt, simulator.point_sampler(0),
                                           simulator.point_sampler(1), config.calibration_R,
                                           config.calibration_seed, config.threads);
    tests.point = summarize(TestKind::WGPLRT, *tests.point_sample, config);
  }
  if (tests.nlrt) {
    tests.integral_sample = sample_statistics(*tests.nlrt, simulator.integral_sampler(0),
                                              simulator.integral_sampler(1), config.calibration_R,
                                              config.calibration_seed, config.threads);
    tests.integral = summarize(TestKind::NLRT, *tests.integral_sample, config);
  }
}

CalibratedTests calibrate_tests(const ExperimentConfig& config, const FieldSimulator& simulator) {
  CalibratedTests tests = prepare_tests(config, simulator);
  calibrate(config, simulator, tests);
  return tests;
}

void load_calibrations(const std::string& dir, CalibratedTests& tests) {
  auto load = [&](TestKind kind) {
    CalibrationResult c = load_calibration(dir + "/calibration_" + to_string(kind) + ".json");
    if (c.kind != kind) throw ConfigError("calibration file for " + to_string(kind) + " has the wrong kind");
    return c;
  };
  if (tests.wgplrt) tests.point = load(TestKind::WGPLRT);
  if (tests.nlrt) tests.integral = load(TestKind::NLRT);
}

void save_tests(const std::string& dir, const CalibratedTests& tests) {
  ensure_directory(dir);
  if (tests.point) save_calibration(dir + "/calibration_wgplrt.json", *tests.point);
  if (tests.integral) save_calibration(dir + "/calibration_nlrt.json", *tests.integral);
  if (tests.wgplrt) {
    save_json(dir + "/laplace_h0.json", to_json(tests.wgplrt->cache(0)));
    save_json(dir + "/laplace_h1.json", to_json(tests.wgplrt->cache(1)));
  }
  if (tests.nlrt) save_json(dir + "/bank.json", to_json(tests.nlrt->bank()));
}

CalibratedTests load_tests(const ExperimentConfig& config, const FieldSimulator& simulator,
                           const std::string& dir) {
  const SensorScene& scene = simulator.scene();
  CalibratedTests tests;
  const bool have = [&] {
    std::ifstream a(dir + "/laplace_h0.json"), b(dir + "/laplace_h1.json");
    return a.good() && b.good();
  }();
  if (!scene.p_sensors.empty()) {
    if (have) {
      LaplaceCache c0 = laplace_cache_from_json(load_json(dir + "/laplace_h0.json"));
      LaplaceCache c1 = laplace_cache_from_json(load_json(dir + "/laplace_h1.json"));
      if (c0.dim() != scene.point_count || c1.dim() != scene.point_count) {
        throw ConfigError("saved Laplace caches do not match scene.M");
      }
      tests.wgplrt.emplace(std::move(c0), std::move(c1));
    } else {
      LaplaceOptions opts;
      opts.seed = config.seed;
      tests.wgplrt.emplace(scene.h0, scene.h1, scene.point_times(), scene.sigma_p, opts);
    }
  }
  if (!scene.i_sensors.empty()) {
    std::optional<SampleBank> bank;
    if (std::ifstream(dir + "/bank.json").good()) {
      SampleBank saved = sample_bank_from_json(load_json(dir + "/bank.json"));
      if (saved.scene_key == scene_hash(config)) bank = std::move(saved);
    }
    if (!bank) {
      bank = build_sample_bank(simulator.integral_sampler(0), simulator.integral_sampler(1), config.nlrt.J,
                               config.nlrt.summary, config.calibration_seed, config.nlrt.standardize,
                               config.threads);
      bank->scene_key = scene_hash(config);
    }
    tests.nlrt.emplace(std::move(*bank), config.nlrt.distance, config.nlrt.delta, config.nlrt.epsilon);
  }
  load_calibrations(dir, tests);
  return tests;
}

std::vector<TransitionMatrix> sensor_channels(const ExperimentConfig& config, const SensorScene& scene,
                                              const CalibratedTests& tests) {
  std::vector<TransitionMatrix> channels;
  channels.reserve(static_cast<std::size_t>(scene.sensor_count()));
  if (!scene.p_sensors.empty()) {
    const TransitionMatrix u = config.transitions.point ? *config.transitions.point
                               : tests.point              ? tests.point->transition
                                                          : throw Error("point channel is not calibrated");
    channels.insert(channels.end(), scene.p_sensors.size(), u);
  }
  if (!scene.i_sensors.empty()) {
    const TransitionMatrix u = config.transitions.integral ? *config.transitions.integral
                               : tests.integral              ? tests.integral->transition
                                                             : throw Error("integral channel is not calibrated");
    channels.insert(channels.end(), scene.i_sensors.size(), u);
  }
  return channels;
}

Eigen::VectorXi sensor_decisions(const SensorScene& scene, const CalibratedTests& tests,
                                 const Realization& realization) {
  const auto np = static_cast<Eigen::Index>(scene.p_sensors.size());
  const auto ni = static_cast<Eigen::Index>(scene.i_sensors.size());
  Eigen::VectorXi out(np + ni);
  if (np > 0 && !(tests.wgplrt && tests.point)) throw Error("WGPLRT is not calibrated");
  if (ni > 0 && !(tests.nlrt && tests.integral)) throw Error("NLRT is not calibrated");
  for (Eigen::Index n = 0; n < np; ++n) {
    const Eigen::VectorXd z = realization.point_obs.row(n).transpose();
    out[n] = decide(TestKind::WGPLRT, tests.wgplrt->statistic(z), tests.point->threshold);
  }
  for (Eigen::Index n = 0; n < ni; ++n) {
    const Eigen::VectorXd z = realization.integral_obs.row(n).transpose();
    out[np + n] = decide(TestKind::NLRT, tests.nlrt->statistic(z), tests.integral->threshold);
  }
  return out;
}

SpatialPrior spatial_prior(const SensorScene& scene) {
  return {scene.spatial_kernel, scene.spatial_mean, scene.threshold.c()};
}

PipelineResult run_pipeline(const ExperimentConfig& config, const PipelineOptions& options) {
  PipelineResult result;
  result.scene = build_scene(config);
  const FieldSimulator simulator(result.scene);
  const SensorScene& scene = simulator.scene();
  result.tests = calibrate_tests(config, simulator);

  const auto sensors = scene.sensors();
  const SpatialPrior prior = spatial_prior(scene);
  result.offline = sblue_offline(sensors, scene.grid, prior, sensor_channels(config, scene, result.tests),
                                 config.diagonal);
  std::optional<OracleRegressor> oracle;
  if (config.baselines.oracle) oracle.emplace(sensors, scene.grid, prior);

  const auto count = static_cast<std::size_t>(config.realizations);
  result.outcomes.resize(count);
  parallel_for(count, config.threads, [&](std::size_t r) {
    const Realization real = simulator.realize(config.seed, r);
    const Eigen::VectorXi truth = real.query_labels();
    const Eigen::VectorXi decisions = sensor_decisions(scene, result.tests, real);
    Prediction pred = sblue_predict(result.offline, decisions);
    RealizationOutcome& out = result.outcomes[r];
    out.sblue = confusion(truth, pred.y_hat);
    if (oracle) out.oracle = confusion(truth, oracle->predict(real.sensor_latent()).y_hat);
    if (config.baselines.knn) {
      const KnnResult knn = knn_baseline(decisions, sensors, scene.grid, config.baselines.k_grid,
                                         config.baselines.folds, config.seed, r);
      out.knn = confusion(truth, knn.y_hat);
      out.knn_k = knn.k;
    }
    if (r == 0) {
      result.example = real;
      result.example_prediction = std::move(pred);
    }
  });

  std::vector<BinaryMetrics> sblue, orc, knn;
  for (const auto& o : result.outcomes) {
    sblue.push_back(binary_metrics(o.sblue, &result.metric_warnings));
    if (o.oracle) orc.push_back(binary_metrics(*o.oracle, &result.metric_warnings));
    if (o.knn) knn.push_back(binary_metrics(*o.knn, &result.metric_warnings));
  }
  result.rows.push_back(average_metrics(Algorithm::SBLUE, sblue));
  if (!orc.empty()) result.rows.push_back(average_metrics(Algorithm::Oracle, orc));
  if (!knn.empty()) result.rows.push_back(average_metrics(Algorithm::KNN, knn));

  if (options.write_outputs) write_pipeline_outputs(config, result);
  return result;
}

namespace {

void write_calibration_outputs(const std::string& dir, const CalibratedTests& tests) {
  CsvWriter roc_csv(dir + "/roc.csv", {"test", "fpr", "tpr"});
  std::vector<Series> curves;
  for (const auto* c : {&tests.point, &tests.integral}) {
    if (!*c) continue;
    const CalibrationResult& cal = **c;
    save_calibration(dir + "/calibration_" + to_string(cal.kind) + ".json", cal);
    Series s;
    s.name = to_string(cal.kind) + " AUC " + format_number(cal.roc.auc).substr(0, 5);
    for (const auto& p : cal.roc.points) {
      roc_csv.cell(to_string(cal.kind)).cell(p.fpr).cell(p.tpr).end_row();
      s.x.push_back(p.fpr);
      s.y.push_back(p.tpr);
    }
    curves.push_back(std::move(s));
  }
  roc_csv.close();
  write_line_plot_svg(dir + "/roc.svg", "ROC of the local tests", "false positive rate",
                      "true positive rate", curves);
}

}  // namespace

void write_pipeline_outputs(const ExperimentConfig& config, const PipelineResult& result) {
  const std::string& dir = config.output_dir;
  ensure_directory(dir);
  {
    std::ofstream cfg(dir + "/config.json", std::ios::binary);
    cfg << to_json(config).dump(2) << "\n";
  }
  CsvWriter metrics(dir + "/metrics.csv",
                    {"realization", "algorithm", "mse", "f1", "fpr", "tpr", "tp", "fp", "tn", "fn"});
  for (std::size_t r = 0; r < result.outcomes.size(); ++r) {
    const auto& o = result.outcomes[r];
    auto row = [&](Algorithm a, const Confusion& c) {
      const BinaryMetrics m = binary_metrics(c);
      metrics.cell(static_cast<long>(r)).cell(to_string(a)).cell(m.mse).cell(m.f1).cell(m.fpr).cell(m.tpr);
      metrics.cell(c.tp).cell(c.fp).cell(c.tn).cell(c.fn).end_row();
    };
    row(Algorithm::SBLUE, o.sblue);
    if (o.oracle) row(Algorithm::Oracle, *o.oracle);
    if (o.knn) row(Algorithm::KNN, *o.knn);
  }
  metrics.close();

  CsvWriter summary(dir + "/summary.csv", {"algorithm", "realizations", "mse", "mse_se", "f1", "f1_se",
                                           "fpr", "fpr_se", "tpr", "tpr_se"});
  for (const auto& m : result.rows) {
    summary.cell(to_string(m.algorithm)).cell(m.realizations).cell(m.mse).cell(m.mse_se).cell(m.f1);
    summary.cell(m.f1_se).cell(m.fpr).cell(m.fpr_se).cell(m.tpr).cell(m.tpr_se).end_row();
  }
  summary.close();

  write_calibration_outputs(dir, result.tests);

  const SensorScene& scene = result.scene;
  const auto q = static_cast<Eigen::Index>(scene.grid.size());
  const Eigen::VectorXd truth = result.example.query_labels().cast<double>();
  const Eigen::VectorXd pred = result.example_prediction.y_hat.cast<double>();
  const Eigen::VectorXd latent = result.example.g.head(q);
  write_field_csv(dir + "/field_true.csv", scene.grid, truth);
  write_field_csv(dir + "/field_latent.csv", scene.grid, latent);
  write_field_csv(dir + "/field_pred.csv", scene.grid, pred);
  write_field_csv(dir + "/field_estimate.csv", scene.grid, result.example_prediction.g_hat);
  write_field_csv(dir + "/risk.csv", scene.grid, result.offline.bayes_risk);

  const auto& d = config.scene.domain;
  const double cw = d.nx > 1 ? (d.x1 - d.x0) / (d.nx - 1) : d.x1 - d.x0;
  const double ch = d.ny > 1 ? (d.y1 - d.y0) / (d.ny - 1) : d.y1 - d.y0;
  const auto sensors = scene.sensors();
  write_heatmap_svg(dir + "/field_true.svg", "True binary field (realization 0)", scene.grid, truth, cw, ch, sensors);
  write_heatmap_svg(dir + "/field_pred.svg", "S-BLUE reconstruction (realization 0)", scene.grid, pred, cw, ch,
                    sensors);
  write_heatmap_svg(dir + "/risk.svg", "Bayes risk of the S-BLUE", scene.grid, result.offline.bayes_risk, cw,
                    ch, sensors);
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& config, SweepAxis axis, double value) {
  ExperimentConfig c = config;
  auto as_count = [&](const char* what) {
    if (value < 1.0 || std::floor(value) != value) {
      throw ConfigError(std::string("sweep values for ") + what + " must be positive integers");
    }
    return static_cast<int>(value);
  };
  switch (axis) {
    case SweepAxis::NoiseSigma:
      if (!(value > 0.0)) throw ConfigError("sweep values for noise_sigma must be positive");
      c.scene.sigma_p = value;
      c.scene.sigma_i = value;
      break;
    case SweepAxis::KIntervals:
      c.scene.K = as_count("K_intervals");
      break;
    case SweepAxis::MPoints:
      c.scene.M = as_count("M_points");
      break;
    case SweepAxis::Alpha:
      if (!(value > 0.0 && value < 1.0)) throw ConfigError("sweep values for alpha must lie in (0, 1)");
      c.alpha = value;
      break;
  }
  return c;
}

namespace {

// Hanley and McNeil standard error of an AUC estimate.
double auc_stderr(double auc, double n0, double n1) {
  const double q1 = auc / (2.0 - auc);
  const double q2 = 2.0 * auc * auc / (1.0 + auc);
  const double var = (auc * (1.0 - auc) + (n1 - 1.0) * (q1 - auc * auc) + (n0 - 1.0) * (q2 - auc * auc)) /
                     (n0 * n1);
  return std::sqrt(std::max(var, 0.0));
}

double proportion_stderr(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, bool write_outputs) {
  if (!config.sweep) throw ConfigError("the configuration has no sweep section");
  const SweepSpec& sw = *config.sweep;
  std::vector<SweepRow> rows;
  for (double value : sw.values) {
    ExperimentConfig c = apply_sweep_value(config, sw.axis, value);
    if (sw.mode == "roc") {
      const FieldSimulator simulator(build_scene(c));
      const CalibratedTests tests = calibrate_tests(c, simulator);
      for (const auto* cal : {&tests.point, &tests.integral}) {
        if (!*cal) continue;
        const CalibrationResult& r = **cal;
        const std::string t = to_string(r.kind);
        const double n = r.replicates;
        rows.push_back({value, t + "_auc", r.roc.auc, auc_stderr(r.roc.auc, n, n)});
        rows.push_back({value, t + "_fpr", r.transition.p01, proportion_stderr(r.transition.p01, n)});
        rows.push_back({value, t + "_tpr", r.transition.p11, proportion_stderr(r.transition.p11, n)});
      }
    } else {
      const PipelineResult res = run_pipeline(c, {false});
      for (const auto& m : res.rows) {
        const std::string a = to_string(m.algorithm);
        rows.push_back({value, a + "_mse", m.mse, m.mse_se});
        rows.push_back({value, a + "_f1", m.f1, m.f1_se});
        rows.push_back({value, a + "_fpr", m.fpr, m.fpr_se});
        rows.push_back({value, a + "_tpr", m.tpr, m.tpr_se});
      }
    }
  }
  if (write_outputs) {
    ensure_directory(config.output_dir);
    const std::string axis = to_string(sw.axis);
    CsvWriter csv(config.output_dir + "/sweep.csv", {"axis", "axis_value", "metric", "mean", "stderr"});
    std::vector<Series> series;
    for (const auto& r : rows) {
      csv.cell(axis).cell(r.axis_value).cell(r.metric).cell(r.mean).cell(r.stderr_).end_row();
      auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == r.metric; });
      if (it == series.end()) {
        series.push_back({r.metric, {}, {}});
        it = std::prev(series.end());
      }
      it->x.push_back(r.axis_value);
      it->y.push_back(r.mean);
    }
    csv.close();
    write_line_plot_svg(config.output_dir + "/sweep.svg", "Sweep over " + axis, axis, "value", series);
  }
  return rows;
}

}  // namespace bsfr
