#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bsfr/bivariate_normal.hpp"
#include "bsfr/config.hpp"
#include "bsfr/errors.hpp"
#include "bsfr/pipeline.hpp"

namespace py = pybind11;
using namespace bsfr;
using nlohmann::json;

namespace {

std::vector<Point2> to_points(const Eigen::MatrixXd& xy) {
  if (xy.cols() != 2) throw DomainError("point arrays must have shape (n, 2)");
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(xy.rows()));
  for (Eigen::Index i = 0; i < xy.rows(); ++i) out.push_back({xy(i, 0), xy(i, 1)});
  return out;
}

Eigen::MatrixXd from_points(const std::vector<Point2>& pts) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) << pts[i].x, pts[i].y;
  return out;
}

TransitionMatrix to_transition(const Eigen::Matrix2d& u) { return {u(0, 0), u(0, 1), u(1, 0), u(1, 1)}; }

Eigen::Matrix2d from_transition(const TransitionMatrix& u) {
  Eigen::Matrix2d m;
  m << u.p00, u.p01, u.p10, u.p11;
  return m;
}

py::dict calibration_dict(const CalibrationResult& c) {
  Eigen::MatrixXd roc(static_cast<Eigen::Index>(c.roc.points.size()), 2);
  for (std::size_t i = 0; i < c.roc.points.size(); ++i) {
    roc.row(static_cast<Eigen::Index>(i)) << c.roc.points[i].fpr, c.roc.points[i].tpr;
  }
  py::dict d;
  d["kind"] = to_string(c.kind);
  d["threshold"] = c.threshold;
  d["transition"] = from_transition(c.transition);
  d["auc"] = c.roc.auc;
  d["roc"] = roc;
  d["R"] = c.replicates;
  return d;
}

py::dict calibrations_dict(const CalibratedTests& t) {
  py::dict d;
  if (t.point) d["wgplrt"] = calibration_dict(*t.point);
  if (t.integral) d["nlrt"] = calibration_dict(*t.integral);
  return d;
}

ExperimentConfig config_from(const std::string& text) { return parse_config(json::parse(text)); }

class PySBlue {
 public:
  PySBlue(const Eigen::MatrixXd& sensors, const Eigen::MatrixXd& queries, const std::string& kernel,
          double mean, double c, const std::vector<Eigen::Matrix2d>& channels, bool bernoulli_diagonal)
      : queries_(queries) {
    std::vector<TransitionMatrix> ch;
    for (const auto& u : channels) ch.push_back(to_transition(u));
    offline_ = sblue_offline(to_points(sensors), to_points(queries), {kernel_from_json(json::parse(kernel)), mean, c},
                             ch, bernoulli_diagonal ? DiagonalRule::Bernoulli : DiagonalRule::PairwiseLimit);
  }
  py::tuple predict(const Eigen::VectorXi& decisions) const {
    const Prediction p = sblue_predict(offline_, decisions);
    return py::make_tuple(p.g_hat, p.y_hat);
  }
  const SBlueOffline& offline() const { return offline_; }

 private:
  Eigen::MatrixXd queries_;
  SBlueOffline offline_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Binary spatial field reconstruction from local likelihood-ratio decisions";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return preset_json(name).dump(); });
  m.def("resolve_config", [](const std::string& text) { return to_json(config_from(text)).dump(); },
        "Parses a configuration document (JSON text) and returns its expanded form.");
  m.def("scene_hash", [](const std::string& text) { return scene_hash(config_from(text)); });

  m.def(
      "scene_points",
      [](const std::string& text) {
        const SensorScene s = build_scene(config_from(text));
        return py::make_tuple(from_points(s.grid), from_points(s.p_sensors), from_points(s.i_sensors));
      },
      "Query points, P-sensor and I-sensor locations of the configured scene.");

  m.def(
      "calibrate",
      [](const std::string& text) {
        const ExperimentConfig cfg = config_from(text);
        CalibratedTests tests;
        {
          py::gil_scoped_release release;
          const FieldSimulator sim(build_scene(cfg));
          tests = calibrate_tests(cfg, sim);
        }
        return calibrations_dict(tests);
      },
      "Thresholds, transition matrices and ROC curves of the local tests.");

  m.def(
      "run_pipeline",
      [](const std::string& text, bool write_outputs) {
        const ExperimentConfig cfg = config_from(text);
        std::optional<PipelineResult> res;
        {
          py::gil_scoped_release release;
          res = run_pipeline(cfg, {write_outputs});
        }
        py::list rows;
        for (const auto& r : res->rows) {
          py::dict d;
          d["algorithm"] = to_string(r.algorithm);
          d["realizations"] = r.realizations;
          d["mse"] = r.mse;
          d["f1"] = r.f1;
          d["fpr"] = r.fpr;
          d["tpr"] = r.tpr;
          d["mse_se"] = r.mse_se;
          d["f1_se"] = r.f1_se;
          d["fpr_se"] = r.fpr_se;
          d["tpr_se"] = r.tpr_se;
          rows.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        out["calibration"] = calibrations_dict(res->tests);
        out["bayes_risk"] = res->offline.bayes_risk;
        return out;
      },
      py::arg("config"), py::arg("write_outputs") = false);

  m.def(
      "warp_forward",
      [](const std::string& warp, const Eigen::VectorXd& z) {
        const WarpSpec w = warp_from_json(json::parse(warp));
        return Eigen::VectorXd(z.unaryExpr([&](double x) { return w.forward(x); }));
      });
  m.def(
      "warp_inverse",
      [](const std::string& warp, const Eigen::VectorXd& v) {
        const WarpSpec w = warp_from_json(json::parse(warp));
        return Eigen::VectorXd(v.unaryExpr([&](double x) { return w.inverse(x); }));
      });

  m.def("bvn_cdf", &bvn_cdf, py::arg("h"), py::arg("k"), py::arg("rho"));
  m.def(
      "binorm_orthant",
      [](double mu_i, double mu_j, double s_i, double s_j, double rho, double c) {
        const Orthants o = binorm_orthant(mu_i, mu_j, s_i, s_j, rho, c);
        py::dict d;
        d["ll"] = o.ll;
        d["lg"] = o.lg;
        d["gl"] = o.gl;
        d["gg"] = o.gg;
        return d;
      },
      py::arg("mu_i"), py::arg("mu_j"), py::arg("sigma_i"), py::arg("sigma_j"), py::arg("rho"), py::arg("c"));

  py::class_<WgplrtDetector>(m, "WgplrtDetector")
      .def(py::init([](const std::string& h0, const std::string& h1, const std::vector<double>& times,
                       double sigma) {
             auto model = [](const std::string& text) {
               const json j = json::parse(text);
               return TemporalModel(kernel_from_json(j.at("kernel")), warp_from_json(j.at("warp")));
             };
             return WgplrtDetector(model(h0), model(h1), times, sigma);
           }),
           py::arg("h0"), py::arg("h1"), py::arg("times"), py::arg("sigma"))
      .def("statistic", &WgplrtDetector::statistic)
      .def("log_likelihood",
           [](const WgplrtDetector& d, int label, const Eigen::VectorXd& z) {
             return approx_log_likelihood(d.cache(label), z);
           });

  py::class_<PySBlue>(m, "SBlue")
      .def(py::init<const Eigen::MatrixXd&, const Eigen::MatrixXd&, const std::string&, double, double,
                    const std::vector<Eigen::Matrix2d>&, bool>(),
           py::arg("sensors"), py::arg("queries"), py::arg("kernel"), py::arg("mean"), py::arg("c"),
           py::arg("channels"), py::arg("bernoulli_diagonal") = true)
      .def("predict", &PySBlue::predict)
      .def_property_readonly("bayes_risk", [](const PySBlue& s) { return s.offline().bayes_risk; })
      .def_property_readonly("mean_decisions", [](const PySBlue& s) { return s.offline().mean_yhat; })
      .def_property_readonly("decision_cov", [](const PySBlue& s) { return s.offline().cov_yhat; });

  m.def(
      "knn_predict",
      [](const Eigen::VectorXi& decisions, const Eigen::MatrixXd& sensors, const Eigen::MatrixXd& queries, int k) {
        return knn_predict(decisions, to_points(sensors), to_points(queries), k);
      },
      py::arg("decisions"), py::arg("sensors"), py::arg("queries"), py::arg("k"));
}
