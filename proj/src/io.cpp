#include "bsfr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bsfr/config.hpp"
#include "bsfr/errors.hpp"

namespace bsfr {

using nlohmann::json;

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter::~CsvWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (filled_ > 0) buffer_ += ',';
  buffer_ += s;
  ++filled_;
  open_row_ = true;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_number(x)); }

CsvWriter& CsvWriter::cell(long x) { return cell(std::to_string(x)); }

void CsvWriter::end_row() {
  if (filled_ != columns_) {
    throw Error("CSV row for " + path_ + " has " + std::to_string(filled_) + " cells, expected " +
                std::to_string(columns_));
  }
  buffer_ += '\n';
  filled_ = 0;
  open_row_ = false;
}

void CsvWriter::close() {
  closed_ = true;
  if (open_row_) throw Error("unterminated CSV row in " + path_);
  std::ofstream out(path_, std::ios::binary);
  out << buffer_;
  if (!out) throw Error("cannot write " + path_);
}

void ensure_directory(const std::string& path) {
  if (path.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error("cannot create directory " + path + ": " + ec.message());
}

void write_field_csv(const std::string& path, const std::vector<Point2>& points,
                     const Eigen::VectorXd& values) {
  if (static_cast<Eigen::Index>(points.size()) != values.size()) {
    throw DomainError("write_field_csv: points and values differ in length");
  }
  CsvWriter csv(path, {"x", "y", "value"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    csv.cell(points[i].x).cell(points[i].y).cell(values[static_cast<Eigen::Index>(i)]).end_row();
  }
  csv.close();
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

std::pair<double, double> padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::abs(lo) > 0 ? 0.05 * std::abs(lo) : 1.0;
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Blue-white-red ramp for t in [0, 1].
std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = static_cast<int>(std::lround(49 + s * (255 - 49)));
    g = static_cast<int>(std::lround(54 + s * (255 - 54)));
    b = static_cast<int>(std::lround(149 + s * (255 - 149)));
  } else {
    const double s = (t - 0.5) / 0.5;
    r = static_cast<int>(std::lround(255 + s * (165 - 255)));
    g = static_cast<int>(std::lround(255 + s * (0 - 255)));
    b = static_cast<int>(std::lround(255 + s * (38 - 255)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<Series>& series) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DomainError("line plot series '" + s.name + "' is ragged");
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  std::tie(x0, x1) = padded(x0, x1);
  std::tie(y0, y1) = padded(y0, y1);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    o << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << fmt(px(xv))
      << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << kTop + ph + 18
      << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(py(yv)) << "\" x2=\"" << kLeft
      << "\" y2=\"" << fmt(py(yv)) << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py(yv) + 4) << "\" text-anchor=\"end\">"
      << tick(yv) << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
    << escape(x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << kTop + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << (i ? " " : "") << fmt(px(s.x[i])) << "," << fmt(py(s.y[i]));
    }
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && s.x.size() <= 40; ++i) {
      o << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"2.5\" fill=\""
        << color << "\"/>\n";
    }
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    o << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw + 32
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kLeft + pw + 38 << "\" y=\"" << ly << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  write_text(path, o.str());
}

void write_heatmap_svg(const std::string& path, const std::string& title,
                       const std::vector<Point2>& points, const Eigen::VectorXd& values,
                       double cell_width, double cell_height, const std::vector<Point2>& sensors) {
  if (static_cast<Eigen::Index>(points.size()) != values.size()) {
    throw DomainError("write_heatmap_svg: points and values differ in length");
  }
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& p : points) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  if (points.empty()) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  x0 -= cell_width / 2, x1 += cell_width / 2, y0 -= cell_height / 2, y1 += cell_height / 2;
  const double vmin = values.size() ? values.minCoeff() : 0.0;
  const double vmax = values.size() ? values.maxCoeff() : 1.0;
  const double side = 400.0;
  const double aspect = (y1 - y0) / (x1 - x0);
  const double pw = aspect <= 1.0 ? side : side / aspect;
  const double ph = aspect <= 1.0 ? side * aspect : side;
  const double left = 30.0, top = 40.0;
  const double width = left + pw + 110.0, height = top + ph + 30.0;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  const double cw = cell_width / (x1 - x0) * pw;
  const double ch = cell_height / (y1 - y0) * ph;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
    << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << fmt(pw) << "\" height=\""
    << fmt(ph) << "\" fill=\"#ddd\"/>\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double v = values[static_cast<Eigen::Index>(i)];
    const double t = vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.5;
    o << "<rect x=\"" << fmt(px(points[i].x) - cw / 2) << "\" y=\"" << fmt(py(points[i].y) - ch / 2)
      << "\" width=\"" << fmt(cw + 0.3) << "\" height=\"" << fmt(ch + 0.3) << "\" fill=\""
      << ramp(t) << "\"/>\n";
  }
  for (const auto& s : sensors) {
    o << "<circle cx=\"" << fmt(px(s.x)) << "\" cy=\"" << fmt(py(s.y))
      << "\" r=\"2\" fill=\"black\"/>\n";
  }
  const double bx = left + pw + 20.0;
  for (int i = 0; i < 50; ++i) {
    const double t = 1.0 - i / 49.0;
    o << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(top + ph * i / 50.0) << "\" width=\"16\" height=\""
      << fmt(ph / 50.0 + 0.3) << "\" fill=\"" << ramp(t) << "\"/>\n";
  }
  o << "<text x=\"" << fmt(bx + 22) << "\" y=\"" << fmt(top + 10) << "\">" << tick(vmax) << "</text>\n";
  o << "<text x=\"" << fmt(bx + 22) << "\" y=\"" << fmt(top + ph) << "\">" << tick(vmin) << "</text>\n";
  o << "</svg>\n";
  write_text(path, o.str());
}

json to_json(const CalibrationResult& c) {
  json roc_points = json::array();
  for (const auto& p : c.roc.points) roc_points.push_back({p.fpr, p.tpr});
  return {{"kind", to_string(c.kind)},
          {"R", c.replicates},
          {"seed", c.seed},
          {"alpha", c.alpha},
          {"threshold", c.threshold},
          {"transition_matrix", {{c.transition.p00, c.transition.p01}, {c.transition.p10, c.transition.p11}}},
          {"auc", c.roc.auc},
          {"roc_points", roc_points}};
}

CalibrationResult calibration_from_json(const json& j) {
  try {
    CalibrationResult c;
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "wgplrt" && kind != "nlrt") throw ConfigError("calibration kind must be wgplrt or nlrt");
    c.kind = kind == "wgplrt" ? TestKind::WGPLRT : TestKind::NLRT;
    c.replicates = j.at("R").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.alpha = j.at("alpha").get<double>();
    c.threshold = j.at("threshold").get<double>();
    const auto& u = j.at("transition_matrix");
    c.transition = {u.at(0).at(0).get<double>(), u.at(0).at(1).get<double>(),
                    u.at(1).at(0).get<double>(), u.at(1).at(1).get<double>()};
    c.roc.auc = j.value("auc", 0.0);
    if (j.contains("roc_points")) {
      for (const auto& p : j.at("roc_points")) c.roc.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed calibration document: ") + e.what());
  }
}

void save_calibration(const std::string& path, const CalibrationResult& c) {
  write_text(path, to_json(c).dump(2) + "\n");
}

CalibrationResult load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file " + path);
  try {
    return calibration_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw ConfigError("matrix row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = data.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

template <class F>
auto parse_artifact(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + " document: " + e.what());
  }
}

}  // namespace

json to_json(const LaplaceCache& c) {
  return {{"format", "bsfr.laplace.v1"},
          {"v_hat", vector_json(c.v_hat)},
          {"a", matrix_json(c.a)},
          {"q_at_vhat", c.q_at_vhat},
          {"logdet_k", c.logdet_k},
          {"logdet_a_plus", c.logdet_a_plus},
          {"precision", matrix_json(c.precision)},
          {"log_c_hat", c.log_c_hat},
          {"sigma", c.sigma},
          {"grad_norm", c.grad_norm},
          {"iterations", c.iterations}};
}

LaplaceCache laplace_cache_from_json(const json& j) {
  return parse_artifact("Laplace cache", [&] {
    if (j.at("format").get<std::string>() != "bsfr.laplace.v1") throw ConfigError("unsupported Laplace cache format");
    LaplaceCache c;
    c.v_hat = vector_from(j.at("v_hat"));
    c.a = matrix_from(j.at("a"));
    c.q_at_vhat = j.at("q_at_vhat").get<double>();
    c.logdet_k = j.at("logdet_k").get<double>();
    c.logdet_a_plus = j.at("logdet_a_plus").get<double>();
    c.precision = matrix_from(j.at("precision"));
    c.log_c_hat = j.at("log_c_hat").get<double>();
    c.sigma = j.at("sigma").get<double>();
    c.grad_norm = j.at("grad_norm").get<double>();
    c.iterations = j.at("iterations").get<int>();
    return c;
  });
}

json to_json(const SampleBank& b) {
  return {{"format", "bsfr.bank.v1"},
          {"scene_key", b.scene_key},
          {"seed", b.seed},
          {"summary", to_json(b.summary)},
          {"standardized", b.standardized},
          {"center", vector_json(b.center)},
          {"scale", vector_json(b.scale)},
          {"h0", matrix_json(b.h0)},
          {"h1", matrix_json(b.h1)}};
}

SampleBank sample_bank_from_json(const json& j) {
  return parse_artifact("sample bank", [&] {
    if (j.at("format").get<std::string>() != "bsfr.bank.v1") throw ConfigError("unsupported bank format");
    SampleBank b;
    b.scene_key = j.at("scene_key").get<std::string>();
    b.seed = j.at("seed").get<std::uint64_t>();
    b.summary = summary_from_json(j.at("summary"));
    b.standardized = j.at("standardized").get<bool>();
    b.center = vector_from(j.at("center"));
    b.scale = vector_from(j.at("scale"));
    b.h0 = matrix_from(j.at("h0"));
    b.h1 = matrix_from(j.at("h1"));
    if (b.h0.rows() != b.h1.rows() || b.h0.cols() != b.h1.cols()) throw ConfigError("bank halves differ in shape");
    return b;
  });
}

json to_json(const SBlueOffline& o) {
  return {{"format", "bsfr.sblue.v1"},
          {"c", o.c},
          {"mean_yhat", vector_json(o.mean_yhat)},
          {"cov_yhat", matrix_json(o.cov_yhat)},
          {"cross_cov", matrix_json(o.cross_cov)},
          {"mu_star", vector_json(o.mu_star)},
          {"prior_var", vector_json(o.prior_var)},
          {"bayes_risk", vector_json(o.bayes_risk)}};
}

SBlueOffline sblue_offline_from_json(const json& j) {
  return parse_artifact("S-BLUE offline", [&] {
    if (j.at("format").get<std::string>() != "bsfr.sblue.v1") throw ConfigError("unsupported S-BLUE format");
    SBlueOffline o;
    o.c = j.at("c").get<double>();
    o.mean_yhat = vector_from(j.at("mean_yhat"));
    o.cov_yhat = matrix_from(j.at("cov_yhat"));
    o.cross_cov = matrix_from(j.at("cross_cov"));
    o.mu_star = vector_from(j.at("mu_star"));
    o.prior_var = vector_from(j.at("prior_var"));
    o.bayes_risk = vector_from(j.at("bayes_risk"));
    o.cov_chol = chol_with_jitter(o.cov_yhat);
    return o;
  });
}

void save_json(const std::string& path, const json& doc) { write_text(path, doc.dump() + "\n"); }

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

Eigen::VectorXi read_decisions_csv(const std::string& path, int count) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open decisions file " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + " is empty");
  Eigen::VectorXi out = Eigen::VectorXi::Constant(count, -1);
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id_s, bit_s;
    if (!std::getline(ss, id_s, ',') || !std::getline(ss, bit_s, ',')) {
      throw ConfigError(path + ":" + std::to_string(row) + ": expected sensor_id,bit");
    }
    int id = 0, bit = 0;
    try {
      id = std::stoi(id_s);
      bit = std::stoi(bit_s);
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(row) + ": not an integer");
    }
    if (id < 0 || id >= count) throw ConfigError(path + ":" + std::to_string(row) + ": sensor id out of range");
    if (bit != 0 && bit != 1) throw ConfigError(path + ":" + std::to_string(row) + ": bit must be 0 or 1");
    if (out[id] != -1) throw ConfigError(path + ":" + std::to_string(row) + ": duplicate sensor id");
    out[id] = bit;
  }
  for (int i = 0; i < count; ++i) {
    if (out[i] == -1) throw ConfigError(path + ": no decision for sensor " + std::to_string(i));
  }
  return out;
}

}  // namespace bsfr
