#include "scbf/io.hpp"

#include "scbf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace scbf::io {

using json = nlohmann::json;
using geometry::ConvexShape;
using geometry::Placement;
using geometry::Vec3;

namespace {

int line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of every value in already-validated JSON text, keyed by field path
// ("joints[2].origin.xyz").
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) : t_(text) { value(""); }
  const std::map<std::string, int>& lines() const { return lines_; }

 private:
  void skip() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) {
      if (t_[i_] == '\n') ++line_;
      ++i_;
    }
  }
  std::string string() {
    std::string out;
    for (++i_; i_ < t_.size() && t_[i_] != '"'; ++i_) {
      if (t_[i_] == '\\') ++i_;
      out += t_[i_];
    }
    ++i_;
    return out;
  }
  void value(const std::string& path) {
    skip();
    if (i_ >= t_.size()) return;
    lines_.emplace(path, line_);
    const char c = t_[i_];
    if (c == '{') {
      ++i_;
      for (skip(); i_ < t_.size() && t_[i_] != '}'; skip()) {
        if (t_[i_] == ',') {
          ++i_;
          continue;
        }
        const std::string key = string();
        skip();
        ++i_;  // ':'
        value(path.empty() ? key : path + "." + key);
      }
      ++i_;
    } else if (c == '[') {
      ++i_;
      std::size_t k = 0;
      for (skip(); i_ < t_.size() && t_[i_] != ']'; skip()) {
        if (t_[i_] == ',') {
          ++i_;
          continue;
        }
        value(path + "[" + std::to_string(k++) + "]");
      }
      ++i_;
    } else if (c == '"') {
      string();
    } else {
      while (i_ < t_.size() && !std::strchr(",]} \t\r\n", t_[i_])) ++i_;
    }
  }

  const std::string& t_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

// Field paths look like "joints[2].origin.xyz". Errors report the line of the
// value at that path, or of its closest present ancestor.
class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  json parse() const {
    try {
      return json::parse(text_);
    } catch (const json::parse_error& e) {
      throw ParseError(source_, line_at(text_, e.byte > 0 ? e.byte - 1 : 0), "", "malformed JSON");
    }
  }

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ParseError(source_, line_of(path), path, what);
  }

  const json& get(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(join(path, key), "missing");
    return *it;
  }
  const json* find(const json& obj, const std::string& key) const {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "not finite");
    return v;
  }
  double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) const {
    const json* j = find(obj, key);
    return j ? number(*j, join(path, key)) : fallback;
  }
  int integer_or(const json& obj, const std::string& key, const std::string& path, int fallback) const {
    const json* j = find(obj, key);
    if (!j) return fallback;
    if (!j->is_number_integer()) fail(join(path, key), "expected an integer");
    return j->get<int>();
  }
  bool boolean_or(const json& obj, const std::string& key, const std::string& path, bool fallback) const {
    const json* j = find(obj, key);
    if (!j) return fallback;
    if (!j->is_boolean()) fail(join(path, key), "expected true or false");
    return j->get<bool>();
  }
  std::string string_or(const json& obj, const std::string& key, const std::string& path, std::string fallback) const {
    const json* j = find(obj, key);
    if (!j) return fallback;
    if (!j->is_string()) fail(join(path, key), "expected a string");
    return j->get<std::string>();
  }

  Eigen::VectorXd vector(const json& j, const std::string& path, int expected = -1) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    if (expected >= 0 && static_cast<int>(j.size()) != expected)
      fail(path, "expected " + std::to_string(expected) + " values, got " + std::to_string(j.size()));
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], index(path, i));
    return v;
  }
  Vec3 vec3(const json& j, const std::string& path) const { return vector(j, path, 3); }

  void version(const json& root) const {
    const json& v = get(root, "format_version", "");
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion)
      fail("format_version", "unsupported version (expected " + std::to_string(kFormatVersion) + ")");
  }

  Placement placement(const json& j, const std::string& path) const {
    if (!j.is_object()) fail(path, "expected an object with xyz and rpy");
    const Vec3 xyz = find(j, "xyz") ? vec3(j["xyz"], join(path, "xyz")) : Vec3::Zero();
    Placement p;
    if (const json* r = find(j, "rotation")) {
      if (find(j, "rpy")) fail(path, "give either rpy or rotation, not both");
      if (!r->is_array() || r->size() != 3) fail(join(path, "rotation"), "expected a 3x3 row-major matrix");
      for (std::size_t i = 0; i < 3; ++i)
        p.rotation.row(static_cast<Eigen::Index>(i)) = vec3((*r)[i], index(join(path, "rotation"), i)).transpose();
      p.translation = xyz;
    } else {
      const Vec3 rpy = find(j, "rpy") ? vec3(j["rpy"], join(path, "rpy")) : Vec3::Zero();
      p = Placement::from_rpy(xyz, rpy[0], rpy[1], rpy[2]);
    }
    guard(path, [&] { p.validate(); });
    return p;
  }
  Placement placement_or_identity(const json& obj, const std::string& key, const std::string& path) const {
    const json* j = find(obj, key);
    return j ? placement(*j, join(path, key)) : Placement{};
  }

  ConvexShape shape(const json& j, const std::string& path) const {
    const std::string type = string_or(j, "type", path, "");
    ConvexShape s;
    if (type == "sphere") {
      const double r = number(get(j, "radius", path), join(path, "radius"));
      guard(path, [&] { s = ConvexShape::sphere(r); });
    } else if (type == "box") {
      const Vec3 he = vec3(get(j, "half_extents", path), join(path, "half_extents"));
      guard(path, [&] { s = ConvexShape::box(he); });
    } else if (type == "capsule") {
      const double r = number(get(j, "radius", path), join(path, "radius"));
      const double hl = number(get(j, "half_length", path), join(path, "half_length"));
      guard(path, [&] { s = ConvexShape::capsule(r, hl); });
    } else if (type == "hull") {
      const json& pts = get(j, "points", path);
      if (!pts.is_array()) fail(join(path, "points"), "expected an array of points");
      std::vector<Vec3> points;
      for (std::size_t i = 0; i < pts.size(); ++i) points.push_back(vec3(pts[i], index(join(path, "points"), i)));
      guard(path, [&] { s = ConvexShape::hull(std::move(points)); });
    } else {
      fail(join(path, "type"), "expected sphere, box, capsule or hull");
    }
    return s;
  }

  template <class F>
  void guard(const std::string& path, F&& f) const {
    try {
      f();
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

 private:
  int line_of(std::string path) const {
    if (!index_) index_ = std::make_unique<LineIndex>(text_);
    const auto& lines = index_->lines();
    while (!path.empty()) {
      if (const auto it = lines.find(path); it != lines.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      path = cut == std::string::npos ? std::string() : path.substr(0, cut);
    }
    return 0;
  }

  const std::string& text_;
  std::string source_;
  mutable std::unique_ptr<LineIndex> index_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

robot::RobotModel parse_robot(const std::string& text, const std::string& source) {
  Reader rd(text, source);
  const json root = rd.parse();
  rd.version(root);

  const json& joints = rd.get(root, "joints", "");
  if (!joints.is_array() || joints.empty()) rd.fail("joints", "expected a non-empty array");
  std::vector<robot::Joint> js;
  std::vector<robot::Link> links;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string path = Reader::index("joints", i);
    const json& jj = joints[i];
    if (!jj.is_object()) rd.fail(path, "expected an object");
    robot::Joint joint;
    joint.name = rd.string_or(jj, "name", path, "joint" + std::to_string(i));
    if (const json* a = rd.find(jj, "axis")) {
      const Vec3 axis = rd.vec3(*a, Reader::join(path, "axis"));
      if (axis.norm() < 1e-12) rd.fail(Reader::join(path, "axis"), "zero axis");
      joint.axis = axis.normalized();
    }
    joint.origin = rd.placement_or_identity(jj, "origin", path);
    joint.lower = rd.number_or(jj, "lower", path, joint.lower);
    joint.upper = rd.number_or(jj, "upper", path, joint.upper);
    joint.max_velocity = rd.number_or(jj, "max_velocity", path, joint.max_velocity);
    if (!(joint.lower < joint.upper)) rd.fail(Reader::join(path, "lower"), "lower must be below upper");
    if (!(joint.max_velocity > 0.0)) rd.fail(Reader::join(path, "max_velocity"), "must be positive");

    robot::Link link;
    link.name = rd.string_or(jj, "link", path, "link" + std::to_string(i));
    if (const json* shapes = rd.find(jj, "shapes")) {
      if (!shapes->is_array()) rd.fail(Reader::join(path, "shapes"), "expected an array");
      for (std::size_t s = 0; s < shapes->size(); ++s) {
        const std::string sp = Reader::index(Reader::join(path, "shapes"), s);
        const json& sj = (*shapes)[s];
        link.shapes.push_back({rd.shape(sj, sp), rd.placement_or_identity(sj, "origin", sp)});
      }
    }
    js.push_back(std::move(joint));
    links.push_back(std::move(link));
  }

  std::set<std::pair<int, int>> excl;
  if (const json* ex = rd.find(root, "exclusions")) {
    if (!ex->is_array()) rd.fail("exclusions", "expected an array of index pairs");
    for (std::size_t i = 0; i < ex->size(); ++i) {
      const json& p = (*ex)[i];
      const std::string path = Reader::index("exclusions", i);
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
        rd.fail(path, "expected [i, j]");
      int a = p[0].get<int>(), b = p[1].get<int>();
      const int n = static_cast<int>(js.size());
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) rd.fail(path, "link index out of range");
      excl.insert({std::min(a, b), std::max(a, b)});
    }
  }

  const Placement tool = rd.placement_or_identity(root, "tool", "");
  const Placement base = rd.placement_or_identity(root, "base", "");
  try {
    return robot::RobotModel(std::move(js), std::move(links), tool, std::move(excl), base);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, "", e.what());
  }
}

sdfield::Scene parse_scene(const std::string& text, const std::string& source) {
  Reader rd(text, source);
  const json root = rd.parse();
  rd.version(root);
  sdfield::Scene scene;
  const json* obs = rd.find(root, "obstacles");
  if (!obs) return scene;
  if (!obs->is_array()) rd.fail("obstacles", "expected an array");
  for (std::size_t i = 0; i < obs->size(); ++i) {
    const std::string path = Reader::index("obstacles", i);
    const json& oj = (*obs)[i];
    if (!oj.is_object()) rd.fail(path, "expected an object");
    std::string name = rd.string_or(oj, "name", path, "obstacle" + std::to_string(i));
    ConvexShape shape = rd.shape(rd.get(oj, "shape", path), Reader::join(path, "shape"));
    if (const json* sched = rd.find(oj, "schedule")) {
      const std::string sp = Reader::join(path, "schedule");
      if (rd.find(oj, "pose")) rd.fail(path, "give either pose or schedule, not both");
      if (!sched->is_array() || sched->empty()) rd.fail(sp, "expected a non-empty array of keyframes");
      std::vector<sdfield::Keyframe> keys;
      for (std::size_t k = 0; k < sched->size(); ++k) {
        const std::string kp = Reader::index(sp, k);
        const json& kj = (*sched)[k];
        keys.push_back({rd.number(rd.get(kj, "t", kp), Reader::join(kp, "t")),
                        rd.placement(rd.get(kj, "pose", kp), Reader::join(kp, "pose"))});
        if (k > 0 && !(keys[k].t > keys[k - 1].t)) rd.fail(Reader::join(kp, "t"), "keyframe times must increase");
      }
      scene.add_moving(std::move(name), std::move(shape), std::move(keys));
    } else {
      scene.add(std::move(name), std::move(shape), rd.placement_or_identity(oj, "pose", path));
    }
  }
  return scene;
}

PlanFile parse_plan(const std::string& text, const std::string& source) {
  Reader rd(text, source);
  const json root = rd.parse();
  rd.version(root);
  PlanFile pf;
  const json& wps = rd.get(root, "waypoints", "");
  if (!wps.is_array() || wps.empty()) rd.fail("waypoints", "expected a non-empty array");
  for (std::size_t i = 0; i < wps.size(); ++i) pf.plan.waypoints.push_back(rd.vector(wps[i], Reader::index("waypoints", i)));
  const int n = static_cast<int>(pf.plan.waypoints.front().size());
  for (std::size_t i = 1; i < wps.size(); ++i)
    if (pf.plan.waypoints[i].size() != n) rd.fail(Reader::index("waypoints", i), "inconsistent joint count");
  pf.start = rd.vector(rd.get(root, "start", ""), "start", n);

  pf.plan.gain = rd.number_or(root, "gain", "", pf.plan.gain);
  pf.plan.switch_radius = rd.number_or(root, "switch_radius", "", pf.plan.switch_radius);
  pf.plan.stall_window = rd.integer_or(root, "stall_window", "", pf.plan.stall_window);
  pf.plan.stall_eps = rd.number_or(root, "stall_eps", "", pf.plan.stall_eps);
  rd.guard("", [&] { pf.plan.validate(n); });

  if (const json* cj = rd.find(root, "config")) {
    const std::string p = "config";
    if (!cj->is_object()) rd.fail(p, "expected an object");
    auto& c = pf.config;
    c.dt = rd.number_or(*cj, "dt", p, c.dt);
    c.horizon = rd.integer_or(*cj, "horizon", p, c.horizon);
    c.alpha = rd.number_or(*cj, "alpha", p, c.alpha);
    c.lambda = rd.number_or(*cj, "lambda", p, c.lambda);
    c.n_samples = rd.integer_or(*cj, "n_samples", p, c.n_samples);
    c.eps = rd.number_or(*cj, "eps", p, c.eps);
    c.beta = rd.number_or(*cj, "beta", p, c.beta);
    if (const json* s = rd.find(*cj, "seed")) {
      if (!s->is_number_unsigned() && !s->is_number_integer()) rd.fail("config.seed", "expected an integer");
      c.seed = s->get<std::uint64_t>();
    }
    c.infeasible_budget = rd.integer_or(*cj, "infeasible_budget", p, c.infeasible_budget);
    c.tracking_tau = rd.number_or(*cj, "tracking_tau", p, c.tracking_tau);
    c.count_support = rd.boolean_or(*cj, "count_support", p, c.count_support);
    c.rounds = rd.integer_or(*cj, "rounds", p, c.rounds);
    c.substeps = rd.integer_or(*cj, "substeps", p, c.substeps);
    c.threads = rd.integer_or(*cj, "threads", p, c.threads);
    if (!(c.dt > 0.0)) rd.fail("config.dt", "must be positive");
    if (c.horizon < 1) rd.fail("config.horizon", "must be positive");
    if (!(c.alpha > 0.0)) rd.fail("config.alpha", "must be positive");
    if (!(c.lambda > 0.0)) rd.fail("config.lambda", "must be positive");
    if (!(c.eps > 0.0 && c.eps < 1.0)) rd.fail("config.eps", "must lie in (0, 1)");
    if (!(c.beta > 0.0 && c.beta < 1.0)) rd.fail("config.beta", "must lie in (0, 1)");
    if (c.n_samples < 0) rd.fail("config.n_samples", "must be nonnegative");
  }
  return pf;
}

cbfsyn::QuadraticCBF parse_cbf(const std::string& text, const std::string& source) {
  Reader rd(text, source);
  const json root = rd.parse();
  rd.version(root);
  cbfsyn::QuadraticCBF cbf;
  cbf.center = rd.vector(rd.get(root, "center", ""), "center");
  const int n = static_cast<int>(cbf.center.size());
  const json& h = rd.get(root, "h", "");
  if (!h.is_array() || static_cast<int>(h.size()) != n) rd.fail("h", "expected an n x n matrix");
  Eigen::MatrixXd hm(n, n);
  for (int i = 0; i < n; ++i) hm.row(i) = rd.vector(h[static_cast<std::size_t>(i)], Reader::index("h", static_cast<std::size_t>(i)), n).transpose();
  if ((hm - hm.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + hm.cwiseAbs().maxCoeff())) rd.fail("h", "not symmetric");
  cbf.h_matrix = numerics::SymMatrix::from_dense(hm);
  cbf.d_b = rd.number(rd.get(root, "d_b", ""), "d_b");
  cbf.alpha = rd.number_or(root, "alpha", "", cbf.alpha);
  cbf.sigma1 = rd.number_or(root, "sigma1", "", cbf.sigma1);
  cbf.radius = rd.number_or(root, "radius", "", cbf.radius);
  cbf.input_scale = rd.number_or(root, "input_scale", "", cbf.input_scale);
  rd.guard("", [&] { cbf.validate(0.0); });
  return cbf;
}

std::string cbf_to_json(const cbfsyn::QuadraticCBF& cbf) {
  json j;
  j["format_version"] = kFormatVersion;
  j["center"] = std::vector<double>(cbf.center.data(), cbf.center.data() + cbf.center.size());
  const Eigen::MatrixXd h = cbf.h_matrix.to_dense();
  json rows = json::array();
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(h.cols()));
    for (Eigen::Index k = 0; k < h.cols(); ++k) row[static_cast<std::size_t>(k)] = h(i, k);
    rows.push_back(row);
  }
  j["h"] = rows;
  j["d_b"] = cbf.d_b;
  j["alpha"] = cbf.alpha;
  j["sigma1"] = cbf.sigma1;
  j["radius"] = cbf.radius;
  j["input_scale"] = cbf.input_scale;
  return j.dump(2);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

robot::RobotModel load_robot(const std::string& path) { return parse_robot(read_file(path), path); }
sdfield::Scene load_scene(const std::string& path) { return parse_scene(read_file(path), path); }
PlanFile load_plan(const std::string& path) { return parse_plan(read_file(path), path); }
cbfsyn::QuadraticCBF load_cbf(const std::string& path) { return parse_cbf(read_file(path), path); }

std::string trace_header(int n, bool timings) {
  std::string h = "step,t";
  for (const char* p : {"x", "u_des", "u_star"})
    for (int i = 0; i < n; ++i) h += "," + std::string(p) + std::to_string(i);
  h += ",sd_ov,b_value,b_next,d_b,qp_status,active_waypoint,c_star,eps_lo,eps_hi,shrink_level,substeps,min_constraint";
  if (timings) h += ",synth_time_ms,filter_time_ms";
  return h;
}

void write_trace(std::ostream& out, const std::vector<control::StepRecord>& trace, int n, bool timings) {
  out << trace_header(n, timings) << '\n';
  for (const auto& r : trace) {
    std::string line = std::to_string(r.step) + "," + fmt(r.t);
    for (const Eigen::VectorXd* v : {&r.x, &r.u_des, &r.u_star})
      for (int i = 0; i < n; ++i) line += "," + fmt(i < v->size() ? (*v)[i] : 0.0);
    line += "," + fmt(r.sd_ov) + "," + fmt(r.b_value) + "," + fmt(r.b_next) + "," + fmt(r.d_b) + "," + r.qp_status +
            "," + std::to_string(r.active_waypoint) + "," + std::to_string(r.c_star) + "," + fmt(r.eps_lo) + "," +
            fmt(r.eps_hi) + "," + std::to_string(r.shrink_level) + "," + std::to_string(r.substeps) + "," +
            fmt(r.min_constraint);
    if (timings) line += "," + fmt(r.synth_time_ms) + "," + fmt(r.filter_time_ms);
    out << line << '\n';
  }
}

void write_trace(const std::string& path, const std::vector<control::StepRecord>& trace, int n, bool timings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace(out, trace, n, timings);
}

std::string summary_to_json(const control::RunSummary& s) {
  json j;
  j["format_version"] = kFormatVersion;
  j["outcome"] = control::to_string(s.outcome);
  j["steps"] = s.steps;
  j["min_sd_ov"] = s.min_sd_ov;
  j["final_state"] = std::vector<double>(s.final_state.data(), s.final_state.data() + s.final_state.size());
  j["final_waypoint"] = s.final_waypoint;
  j["infeasible_steps"] = s.infeasible_steps;
  j["n_samples"] = s.n_samples;
  j["median_synth_ms"] = s.median_synth_ms;
  j["median_filter_ms"] = s.median_filter_ms;
  j["total_ms"] = s.total_ms;
  return j.dump(2);
}

Eigen::VectorXd parse_vector(const std::string& csv, const std::string& field) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ParseError("", 0, field, "'" + tok + "' is not a number");
    }
    if (tok.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
      throw ParseError("", 0, field, "'" + tok + "' is not a number");
    vals.push_back(v);
  }
  if (vals.empty()) throw ParseError("", 0, field, "empty vector");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace scbf::io
