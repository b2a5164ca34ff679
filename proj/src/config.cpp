#include "bsfr/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "bsfr/errors.hpp"
#include "bsfr/normal.hpp"
#include "bsfr/rng.hpp"

namespace bsfr {

using nlohmann::json;

namespace {

// Reads an object while recording which keys were consumed, so that leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + " is required");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    return get<T>(key);
  }

  Section child(const std::string& key) { return Section(raw(key), where(key)); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown key " + where(item.key()));
    }
  }

  std::string where(const std::string& key = "") const {
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<Point2> points_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be a list of [x, y] pairs");
  std::vector<Point2> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ConfigError(where + " entries must be [x, y] pairs");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

json points_to_json(const std::vector<Point2>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back({p.x, p.y});
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

json temporal_json(const std::string& family, double length_scale, const json& warp) {
  return {{"kernel", {{"family", family}, {"scale", 1.0}, {"length_scale", length_scale}}},
          {"warp", warp}};
}

// Approximate locations of 21 Singapore weather stations (lon, lat). These are
// placeholders for the unpublished coordinates, not measured values.
const std::vector<Point2>& nea_placeholder_stations() {
  static const std::vector<Point2> stations{
      {103.9826, 1.3678}, {103.7768, 1.3337}, {103.8878, 1.3399}, {103.6817, 1.3458},
      {103.7854, 1.4439}, {103.8275, 1.2500}, {103.9673, 1.4168}, {103.9625, 1.3135},
      {103.8703, 1.2799}, {103.8492, 1.3764}, {103.8365, 1.3106}, {103.6184, 1.2938},
      {103.7540, 1.2810}, {103.6790, 1.2560}, {103.7224, 1.3724}, {103.8230, 1.4172},
      {103.7490, 1.4180}, {103.9037, 1.3524}, {103.7116, 1.3816}, {103.7100, 1.4400},
      {103.9500, 1.3800}};
  return stations;
}

}  // namespace

// ---------------------------------------------------------------- pieces

json to_json(const CovKernel& k) {
  return {{"family", to_string(k.family())}, {"scale", k.scale()}, {"length_scale", k.length_scale()}};
}

CovKernel kernel_from_json(const json& j) {
  Section s(j, "kernel");
  const auto family = kernel_family_from_string(s.get<std::string>("family"));
  const double scale = s.get_or<double>("scale", 1.0);
  const double length = s.get<double>("length_scale");
  s.finish();
  try {
    return CovKernel(family, scale, length);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

json to_json(const WarpSpec& w) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IdentityWarp>) {
          return {{"family", "identity"}};
        } else if constexpr (std::is_same_v<T, GammaWarp>) {
          return {{"family", "gamma"},
                  {"shape", f.shape},
                  {"scale", f.scale},
                  {"post_map", {{"offset", f.post_map.offset}, {"slope", f.post_map.slope}}}};
        } else {
          return {{"family", "tukey_gh"}, {"g", f.g},         {"h", f.h},
                  {"loc", f.loc},         {"scale", f.scale},
                  {"tail", f.tail == TailConvention::Half ? "half" : "full"}};
        }
      },
      w.family());
}

WarpSpec warp_from_json(const json& j) {
  Section s(j, "warp");
  const auto family = s.get<std::string>("family");
  try {
    if (family == "identity") {
      s.finish();
      return WarpSpec::identity();
    }
    if (family == "gamma") {
      const double shape = s.get<double>("shape");
      const double scale = s.get<double>("scale");
      AffineMap post;
      if (s.has("post_map")) {
        Section p = s.child("post_map");
        post.offset = p.get_or<double>("offset", 0.0);
        post.slope = p.get_or<double>("slope", 1.0);
        p.finish();
      } else {
        s.get_or<json>("post_map", json());
      }
      s.finish();
      return WarpSpec::gamma(shape, scale, post);
    }
    if (family == "tukey_gh") {
      const double g = s.get<double>("g");
      const double h = s.get<double>("h");
      const double loc = s.get_or<double>("loc", 0.0);
      const double scale = s.get_or<double>("scale", 1.0);
      const auto tail = s.get_or<std::string>("tail", "half");
      require(tail == "half" || tail == "full", "warp.tail must be 'half' or 'full'");
      s.finish();
      return WarpSpec::tukey_gh(g, h, loc, scale,
                                tail == "half" ? TailConvention::Half : TailConvention::Full);
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown warp family '" + family + "'");
}

json to_json(const SummaryStat& st) {
  switch (st.kind()) {
    case SummaryStat::Kind::ACF:
      return {{"kind", "acf"}, {"lags", st.lags()}};
    case SummaryStat::Kind::Moments: {
      json names = json::array();
      for (Moment m : st.which()) names.push_back(to_string(m));
      return {{"kind", "moments"}, {"which", names}};
    }
    case SummaryStat::Kind::Concat: {
      json parts = json::array();
      for (const auto& p : st.parts()) parts.push_back(to_json(p));
      return {{"kind", "concat"}, {"parts", parts}};
    }
  }
  return {};
}

SummaryStat summary_from_json(const json& j) {
  Section s(j, "summary");
  const auto kind = s.get<std::string>("kind");
  SummaryStat out = SummaryStat::acf({1});
  if (kind == "acf") {
    out = SummaryStat::acf(s.get<std::vector<int>>("lags"));
  } else if (kind == "moments") {
    std::vector<Moment> which;
    for (const auto& name : s.get<std::vector<std::string>>("which")) {
      which.push_back(moment_from_string(name));
    }
    out = SummaryStat::moments(which);
  } else if (kind == "concat") {
    std::vector<SummaryStat> parts;
    const json& arr = s.raw("parts");
    require(arr.is_array(), "summary.parts must be a list");
    for (const auto& p : arr) parts.push_back(summary_from_json(p));
    out = SummaryStat::concat(parts);
  } else {
    throw ConfigError("unknown summary kind '" + kind + "'");
  }
  s.finish();
  return out;
}

json to_json(const TransitionMatrix& u) { return {{u.p00, u.p01}, {u.p10, u.p11}}; }

TransitionMatrix transition_from_json(const json& j) {
  require(j.is_array() && j.size() == 2 && j[0].is_array() && j[1].is_array() && j[0].size() == 2 &&
              j[1].size() == 2,
          "transition matrices must be [[p00, p01], [p10, p11]]");
  TransitionMatrix u{j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(),
                     j[1][1].get<double>()};
  for (double p : {u.p00, u.p01, u.p10, u.p11}) require(p >= 0.0 && p <= 1.0, "transition entries must lie in [0, 1]");
  require(std::abs(u.p00 + u.p01 - 1.0) < 1e-9 && std::abs(u.p10 + u.p11 - 1.0) < 1e-9,
          "transition matrix rows must sum to 1");
  return u;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::NoiseSigma:
      return "noise_sigma";
    case SweepAxis::KIntervals:
      return "K_intervals";
    case SweepAxis::MPoints:
      return "M_points";
    case SweepAxis::Alpha:
      return "alpha";
  }
  return "K_intervals";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "noise_sigma") return SweepAxis::NoiseSigma;
  if (name == "K_intervals") return SweepAxis::KIntervals;
  if (name == "M_points") return SweepAxis::MPoints;
  if (name == "alpha") return SweepAxis::Alpha;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

double SceneSpec::threshold_c() const {
  if (c) return *c;
  return BernoulliThreshold::from_pi(pi.value_or(0.5)).c();
}

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names() { return {"exp1_synthetic", "exp2_sensitivity", "nea_fitted"}; }

json preset_json(const std::string& name) {
  const json gh = {{"family", "tukey_gh"}, {"g", 0.1}, {"h", 0.4}, {"loc", 1.0}, {"scale", 1.0},
                   {"tail", "half"}};
  const json odd_k = {1, 3, 5, 7, 9, 11, 13, 15};
  json synthetic = {
      {"seed", 1},
      {"scene",
       {{"domain", {{"x", {-5.0, 5.0}}, {"y", {-5.0, 5.0}}, {"nx", 50}, {"ny", 50}}},
        {"sensors", {{"placement", "random"}, {"n_point", 125}, {"n_integral", 125}}},
        {"spatial",
         {{"kernel", {{"family", "squared_exponential"}, {"scale", 1.0}, {"length_scale", 0.5}}},
          {"mean", 0.0},
          {"pi", 0.5}}},
        {"temporal", {{"h0", temporal_json("matern12", 1.0, gh)}, {"h1", temporal_json("matern52", 1.0, gh)}}},
        {"horizon", 20.0},
        {"M", 50},
        {"K", 50},
        {"sigma_p", 0.1},
        {"sigma_i", 0.1},
        {"substeps", 50}}},
      {"alpha", 0.1},
      {"calibration", {{"R", 10000}, {"seed", 2}}},
      {"nlrt",
       {{"J", 10000},
        {"delta", 0.1},
        {"epsilon", 0.1},
        {"summary", {{"kind", "acf"}, {"lags", {1, 2, 3, 4}}}},
        {"distance", "euclidean"},
        {"standardize", false}}},
      {"realizations", 100},
      {"baselines", {{"oracle", true}, {"knn", true}, {"k_grid", odd_k}, {"folds", 5}}},
      {"sblue", {{"diagonal", "bernoulli"}}},
      {"output_dir", "out/" + name}};

  if (name == "exp1_synthetic") return synthetic;
  if (name == "exp2_sensitivity") {
    json j = synthetic;
    j["scene"]["M"] = 64;
    j["scene"]["K"] = 64;
    j["sweep"] = {{"axis", "K_intervals"},
                  {"values", {10, 20, 30, 40, 50, 64, 70, 80, 90, 100, 110, 120, 130}},
                  {"mode", "roc"}};
    return j;
  }
  if (name == "nea_fitted") {
    auto gamma = [](double a, double b) {
      return json{{"family", "gamma"},
                  {"shape", a},
                  {"scale", b},
                  {"post_map", {{"offset", 10.0}, {"slope", -1.0}}}};
    };
    json j = synthetic;
    j["scene"] = {
        {"domain", {{"x", {103.60, 104.00}}, {"y", {1.22, 1.47}}, {"nx", 50}, {"ny", 50}}},
        {"sensors",
         {{"placement", "explicit"}, {"point", points_to_json(nea_placeholder_stations())}, {"integral", json::array()}}},
        {"spatial",
         {{"kernel", {{"family", "matern52"}, {"scale", 5.3068}, {"length_scale", 0.0344}}},
          {"mean", 75.0566},
          {"c", 75.3692}}},
        {"temporal",
         {{"h0", temporal_json("matern52", 3.7622, gamma(53.7457, 0.1771))},
          {"h1", temporal_json("matern52", 4.0654, gamma(43.3694, 0.2417))}}},
        {"horizon", 133.0},
        {"M", 133},
        {"K", 133},
        {"sigma_p", 0.1},
        {"sigma_i", 0.1},
        {"substeps", 50}};
    return j;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------- parsing

namespace {

SceneSpec parse_scene(Section s) {
  SceneSpec sc;
  {
    Section d = s.child("domain");
    const auto xs = d.get<std::vector<double>>("x");
    const auto ys = d.get<std::vector<double>>("y");
    require(xs.size() == 2 && ys.size() == 2, "scene.domain.x and .y must be [lo, hi]");
    require(xs[0] < xs[1] && ys[0] < ys[1], "scene.domain bounds must be increasing");
    sc.domain = {xs[0], xs[1], ys[0], ys[1], d.get<int>("nx"), d.get<int>("ny")};
    require(sc.domain.nx >= 1 && sc.domain.ny >= 1, "scene.domain.nx and .ny must be positive");
    d.finish();
  }
  {
    Section p = s.child("sensors");
    const auto placement = p.get<std::string>("placement");
    if (placement == "random") {
      sc.sensors.placement = SensorSpec::Placement::Random;
      sc.sensors.n_point = p.get<int>("n_point");
      sc.sensors.n_integral = p.get<int>("n_integral");
      require(sc.sensors.n_point >= 0 && sc.sensors.n_integral >= 0, "sensor counts must be nonnegative");
    } else if (placement == "explicit") {
      sc.sensors.placement = SensorSpec::Placement::Explicit;
      sc.sensors.point = points_from_json(p.get_or<json>("point", json::array()), "scene.sensors.point");
      sc.sensors.integral =
          points_from_json(p.get_or<json>("integral", json::array()), "scene.sensors.integral");
      sc.sensors.n_point = static_cast<int>(sc.sensors.point.size());
      sc.sensors.n_integral = static_cast<int>(sc.sensors.integral.size());
    } else {
      throw ConfigError("scene.sensors.placement must be 'random' or 'explicit'");
    }
    require(sc.sensors.n_point + sc.sensors.n_integral >= 1, "at least one sensor is required");
    p.finish();
  }
  {
    Section sp = s.child("spatial");
    sc.spatial_kernel = kernel_from_json(sp.raw("kernel"));
    sc.spatial_mean = sp.get_or<double>("mean", 0.0);
    if (sp.has("pi")) sc.pi = sp.get<double>("pi");
    if (sp.has("c")) sc.c = sp.get<double>("c");
    sp.get_or<json>("pi", json());
    sp.get_or<json>("c", json());
    require(!(sc.pi && sc.c), "scene.spatial: give either pi or c, not both");
    if (sc.pi) require(*sc.pi > 0.0 && *sc.pi < 1.0, "scene.spatial.pi must lie in (0, 1)");
    sp.finish();
  }
  {
    Section t = s.child("temporal");
    for (int label = 0; label < 2; ++label) {
      Section h = t.child(label == 0 ? "h0" : "h1");
      const CovKernel k = kernel_from_json(h.raw("kernel"));
      require(k.scale() == 1.0, "temporal kernels must have scale 1");
      (label == 0 ? sc.h0 : sc.h1) = TemporalModel(k, warp_from_json(h.raw("warp")));
      h.finish();
    }
    t.finish();
  }
  sc.horizon = s.get<double>("horizon");
  sc.M = s.get<int>("M");
  sc.K = s.get<int>("K");
  sc.sigma_p = s.get<double>("sigma_p");
  sc.sigma_i = s.get<double>("sigma_i");
  sc.substeps = s.get_or<int>("substeps", 50);
  require(sc.horizon > 0.0, "scene.horizon must be positive");
  require(sc.M >= 1 && sc.K >= 1, "scene.M and scene.K must be at least 1");
  require(sc.sigma_p > 0.0 && sc.sigma_i > 0.0, "noise standard deviations must be positive");
  require(sc.substeps >= 2, "scene.substeps must be at least 2");
  s.finish();
  return sc;
}

}  // namespace

ExperimentConfig parse_config(const json& doc_in) {
  require(doc_in.is_object(), "configuration must be a JSON object");
  json doc = doc_in;
  std::optional<std::string> preset;
  if (doc.contains("preset") && !doc["preset"].is_null()) {
    require(doc["preset"].is_string(), "preset must be a string");
    preset = doc["preset"].get<std::string>();
    json base = preset_json(*preset);
    json patch = doc;
    patch.erase("preset");
    base.merge_patch(patch);
    doc = base;
  }

  ExperimentConfig cfg;
  cfg.preset = preset;
  Section root(doc, "config");
  root.get_or<json>("preset", json());
  cfg.seed = root.get_or<std::uint64_t>("seed", 1);
  cfg.scene = parse_scene(root.child("scene"));
  cfg.alpha = root.get_or<double>("alpha", 0.1);
  require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "alpha must lie in (0, 1)");
  if (root.has("calibration")) {
    Section c = root.child("calibration");
    cfg.calibration_R = c.get_or<int>("R", 10000);
    cfg.calibration_seed = c.get_or<std::uint64_t>("seed", 2);
    c.finish();
  }
  require(cfg.calibration_R >= 100, "calibration.R must be at least 100");
  if (root.has("nlrt")) {
    Section n = root.child("nlrt");
    cfg.nlrt.J = n.get_or<int>("J", 10000);
    cfg.nlrt.delta = n.get_or<double>("delta", 0.1);
    cfg.nlrt.epsilon = n.get_or<double>("epsilon", 0.1);
    if (n.has("summary")) cfg.nlrt.summary = summary_from_json(n.raw("summary"));
    n.get_or<json>("summary", json());
    cfg.nlrt.distance = distance_from_string(n.get_or<std::string>("distance", "euclidean"));
    cfg.nlrt.standardize = n.get_or<bool>("standardize", false);
    n.finish();
  }
  require(cfg.nlrt.J >= 1, "nlrt.J must be at least 1");
  require(cfg.nlrt.delta > 0.0 && cfg.nlrt.epsilon > 0.0, "nlrt.delta and nlrt.epsilon must be positive");
  cfg.realizations = root.get_or<int>("realizations", 100);
  require(cfg.realizations >= 1, "realizations must be at least 1");
  if (root.has("baselines")) {
    Section b = root.child("baselines");
    cfg.baselines.oracle = b.get_or<bool>("oracle", true);
    cfg.baselines.knn = b.get_or<bool>("knn", true);
    cfg.baselines.k_grid = b.get_or<std::vector<int>>("k_grid", cfg.baselines.k_grid);
    cfg.baselines.folds = b.get_or<int>("folds", 5);
    b.finish();
    require(!cfg.baselines.k_grid.empty(), "baselines.k_grid must not be empty");
    for (int k : cfg.baselines.k_grid) require(k >= 1 && k % 2 == 1, "baselines.k_grid entries must be positive odd integers");
    require(cfg.baselines.folds >= 2, "baselines.folds must be at least 2");
  }
  if (root.has("sblue")) {
    Section s = root.child("sblue");
    const auto rule = s.get_or<std::string>("diagonal", "bernoulli");
    require(rule == "bernoulli" || rule == "pairwise_limit",
            "sblue.diagonal must be 'bernoulli' or 'pairwise_limit'");
    cfg.diagonal = rule == "bernoulli" ? DiagonalRule::Bernoulli : DiagonalRule::PairwiseLimit;
    s.finish();
  }
  if (root.has("transitions")) {
    Section t = root.child("transitions");
    if (t.has("point")) cfg.transitions.point = transition_from_json(t.raw("point"));
    if (t.has("integral")) cfg.transitions.integral = transition_from_json(t.raw("integral"));
    t.get_or<json>("point", json());
    t.get_or<json>("integral", json());
    t.finish();
  }
  if (root.has("sweep")) {
    Section s = root.child("sweep");
    SweepSpec sw;
    sw.axis = sweep_axis_from_string(s.get<std::string>("axis"));
    sw.values = s.get<std::vector<double>>("values");
    sw.mode = s.get_or<std::string>("mode", "roc");
    require(!sw.values.empty(), "sweep.values must not be empty");
    require(sw.mode == "roc" || sw.mode == "pipeline", "sweep.mode must be 'roc' or 'pipeline'");
    s.finish();
    cfg.sweep = sw;
  }
  for (const char* key : {"calibration", "nlrt", "baselines", "sblue", "transitions", "sweep"}) {
    root.get_or<json>(key, json());
  }
  cfg.output_dir = root.get_or<std::string>("output_dir", "out");
  cfg.threads = root.get_or<int>("threads", 1);
  root.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig preset_config(const std::string& name) {
  return parse_config(json{{"preset", name}});
}

json to_json(const ExperimentConfig& c) {
  const SceneSpec& s = c.scene;
  json sensors;
  if (s.sensors.placement == SensorSpec::Placement::Random) {
    sensors = {{"placement", "random"}, {"n_point", s.sensors.n_point}, {"n_integral", s.sensors.n_integral}};
  } else {
    sensors = {{"placement", "explicit"},
               {"point", points_to_json(s.sensors.point)},
               {"integral", points_to_json(s.sensors.integral)}};
  }
  json spatial = {{"kernel", to_json(s.spatial_kernel)}, {"mean", s.spatial_mean}};
  if (s.c) spatial["c"] = *s.c;
  if (s.pi) spatial["pi"] = *s.pi;
  json out = {
      {"seed", c.seed},
      {"scene",
       {{"domain", {{"x", {s.domain.x0, s.domain.x1}}, {"y", {s.domain.y0, s.domain.y1}}, {"nx", s.domain.nx}, {"ny", s.domain.ny}}},
        {"sensors", sensors},
        {"spatial", spatial},
        {"temporal",
         {{"h0", {{"kernel", to_json(s.h0.kernel)}, {"warp", to_json(s.h0.warp)}}},
          {"h1", {{"kernel", to_json(s.h1.kernel)}, {"warp", to_json(s.h1.warp)}}}}},
        {"horizon", s.horizon},
        {"M", s.M},
        {"K", s.K},
        {"sigma_p", s.sigma_p},
        {"sigma_i", s.sigma_i},
        {"substeps", s.substeps}}},
      {"alpha", c.alpha},
      {"calibration", {{"R", c.calibration_R}, {"seed", c.calibration_seed}}},
      {"nlrt",
       {{"J", c.nlrt.J},
        {"delta", c.nlrt.delta},
        {"epsilon", c.nlrt.epsilon},
        {"summary", to_json(c.nlrt.summary)},
        {"distance", to_string(c.nlrt.distance)},
        {"standardize", c.nlrt.standardize}}},
      {"realizations", c.realizations},
      {"baselines",
       {{"oracle", c.baselines.oracle}, {"knn", c.baselines.knn}, {"k_grid", c.baselines.k_grid}, {"folds", c.baselines.folds}}},
      {"sblue", {{"diagonal", c.diagonal == DiagonalRule::Bernoulli ? "bernoulli" : "pairwise_limit"}}},
      {"output_dir", c.output_dir},
      {"threads", c.threads}};
  json tr = json::object();
  if (c.transitions.point) tr["point"] = to_json(*c.transitions.point);
  if (c.transitions.integral) tr["integral"] = to_json(*c.transitions.integral);
  if (!tr.empty()) out["transitions"] = tr;
  if (c.sweep) {
    out["sweep"] = {{"axis", to_string(c.sweep->axis)}, {"values", c.sweep->values}, {"mode", c.sweep->mode}};
  }
  return out;
}

SensorScene build_scene(const ExperimentConfig& config) {
  const SceneSpec& s = config.scene;
  SensorScene scene;
  const auto lattice = make_grid(s.domain.x0, s.domain.x1, s.domain.y0, s.domain.y1, s.domain.nx, s.domain.ny);
  if (s.sensors.placement == SensorSpec::Placement::Random) {
    RngStream rng(config.seed, stream_key(StreamTag::kPlacement, {0}));
    Placement p = place_sensors_random(lattice, s.sensors.n_point, s.sensors.n_integral, rng);
    scene.grid = std::move(p.queries);
    scene.p_sensors = std::move(p.p_sensors);
    scene.i_sensors = std::move(p.i_sensors);
  } else {
    scene.p_sensors = s.sensors.point;
    scene.i_sensors = s.sensors.integral;
    // Lattice points that coincide with a sensor are not queried.
    for (const auto& q : lattice) {
      bool taken = false;
      for (const auto& p : scene.sensors()) taken = taken || (p == q);
      if (!taken) scene.grid.push_back(q);
    }
  }
  scene.spatial_kernel = s.spatial_kernel;
  scene.spatial_mean = s.spatial_mean;
  scene.threshold = BernoulliThreshold::from_c(s.threshold_c());
  scene.h0 = s.h0;
  scene.h1 = s.h1;
  scene.horizon = s.horizon;
  scene.point_count = s.M;
  scene.interval_count = s.K;
  scene.sigma_p = s.sigma_p;
  scene.sigma_i = s.sigma_i;
  scene.substeps = s.substeps;
  scene.validate();
  return scene;
}

std::string scene_hash(const ExperimentConfig& config) {
  const json doc = to_json(config);
  const std::string text = json{{"scene", doc["scene"]}, {"seed", doc["seed"]}}.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bsfr
