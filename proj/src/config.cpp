#include "shapeflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shapeflow/error.hpp"

namespace shapeflow::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  return x;
}

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string to_string(Model m) {
  switch (m) {
    case Model::kReconstruct: return "reconstruct";
    case Model::kDrag: return "drag";
    case Model::kEigen: return "eigen";
    case Model::kHolefill: return "holefill";
  }
  return "?";
}

std::string to_string(Flow f) {
  switch (f) {
    case Flow::kH1: return "h1";
    case Flow::kInertial: return "inertial";
    case Flow::kInertialMdr: return "inertial-mdr";
    case Flow::kInertialBgnMdr: return "inertial-bgn-mdr";
    case Flow::kInertialBgnHarmonic: return "inertial-bgn-harmonic";
  }
  return "?";
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "model") {
    if (v == "reconstruct") cfg.model = Model::kReconstruct;
    else if (v == "drag") cfg.model = Model::kDrag;
    else if (v == "eigen") cfg.model = Model::kEigen;
    else if (v == "holefill") cfg.model = Model::kHolefill;
    else throw ConfigError("config: unknown model '" + v + "'");
  } else if (key == "flow") {
    if (v == "h1") cfg.flow = Flow::kH1;
    else if (v == "inertial") cfg.flow = Flow::kInertial;
    else if (v == "inertial-mdr") cfg.flow = Flow::kInertialMdr;
    else if (v == "inertial-bgn-mdr") cfg.flow = Flow::kInertialBgnMdr;
    else if (v == "inertial-bgn-harmonic") cfg.flow = Flow::kInertialBgnHarmonic;
    else throw ConfigError("config: unknown flow '" + v + "'");
  } else if (key == "mesh") {
    cfg.mesh = v;
  } else if (key == "tau") {
    cfg.tau = to_double(key, v);
  } else if (key == "T") {
    cfg.T = to_double(key, v);
  } else if (key == "eps0") {
    cfg.eps0 = to_double(key, v);
  } else if (key == "c") {
    cfg.c = to_double(key, v);
  } else if (key == "t0") {
    cfg.t0 = to_double(key, v);
  } else if (key == "gap_tol") {
    cfg.gap_tol = to_double(key, v);
  } else if (key == "stop_tol") {
    cfg.stop_tol = to_double(key, v);
  } else if (key == "snapshot_every") {
    cfg.snapshot_every = to_int(key, v);
  } else if (key == "u_d") {
    cfg.u_d = v;
  } else if (key == "inflow") {
    cfg.inflow = v;
  } else if (key == "mu") {
    cfg.mu = to_double(key, v);
  } else if (key == "force") {
    const auto comma = v.find(',');
    if (comma == std::string::npos) throw ConfigError("config: force expects 'fx,fy'");
    cfg.force_x = to_double(key, trim(v.substr(0, comma)));
    cfg.force_y = to_double(key, trim(v.substr(comma + 1)));
  } else if (key == "ell") {
    cfg.ell = to_int(key, v);
  } else if (key == "mu_out") {
    cfg.mu_out = v;
  } else if (key == "tilt_deg") {
    cfg.tilt_deg = to_double(key, v);
  } else if (key == "rel_tol") {
    cfg.rel_tol = to_double(key, v);
  } else if (key == "window") {
    cfg.window = to_int(key, v);
  } else if (key == "out") {
    cfg.out = v;
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

RunConfig parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      apply(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
  }
  return cfg;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void validate(const RunConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(cfg.T >= cfg.tau)) throw ConfigError("T must be at least tau");
  if (!(cfg.eps0 >= 0.0)) throw ConfigError("eps0 must be non-negative");
  if (!(cfg.c > 0.0) || !(cfg.t0 > 0.0)) throw ConfigError("damping constants c and t0 must be positive");
  if (!(cfg.gap_tol >= 0.0)) throw ConfigError("gap_tol must be non-negative");
  if (!(cfg.stop_tol >= 0.0)) throw ConfigError("stop_tol must be non-negative");
  if (cfg.snapshot_every < 1) throw ConfigError("snapshot_every must be at least 1");
  if (!(cfg.mu > 0.0)) throw ConfigError("mu must be positive");
  if (cfg.ell < 1) throw ConfigError("ell is 1-based");
  if (cfg.window < 1) throw ConfigError("window must be at least 1");
  if (cfg.mesh.empty()) throw ConfigError("mesh is required");
  if (cfg.model == Model::kHolefill) {
    if (cfg.flow != Flow::kInertialMdr)
      throw ConfigError("holefill runs the inertial-MDR Willmore pipeline: flow must be inertial-mdr, got " +
                        to_string(cfg.flow));
    if (cfg.mu_out != "sphere" && cfg.mu_out != "tilt") throw ConfigError("mu_out must be sphere or tilt");
  }
  if (cfg.model == Model::kReconstruct && cfg.u_d != "recon-case1" && cfg.u_d != "recon-case2")
    throw ConfigError("unknown u_d preset '" + cfg.u_d + "'");
  if (cfg.model == Model::kDrag && cfg.inflow != "drag-case1")
    throw ConfigError("unknown inflow preset '" + cfg.inflow + "'");
}

std::string to_text(const RunConfig& cfg) {
  std::ostringstream o;
  o << "model = " << to_string(cfg.model) << '\n'
    << "flow = " << to_string(cfg.flow) << '\n'
    << "mesh = " << cfg.mesh << '\n'
    << "tau = " << num(cfg.tau) << '\n'
    << "T = " << num(cfg.T) << '\n'
    << "eps0 = " << num(cfg.eps0) << '\n'
    << "c = " << num(cfg.c) << '\n'
    << "t0 = " << num(cfg.t0) << '\n'
    << "gap_tol = " << num(cfg.gap_tol) << '\n'
    << "stop_tol = " << num(cfg.stop_tol) << '\n'
    << "snapshot_every = " << cfg.snapshot_every << '\n'
    << "u_d = " << cfg.u_d << '\n'
    << "inflow = " << cfg.inflow << '\n'
    << "mu = " << num(cfg.mu) << '\n'
    << "force = " << num(cfg.force_x) << ',' << num(cfg.force_y) << '\n'
    << "ell = " << cfg.ell << '\n'
    << "mu_out = " << cfg.mu_out << '\n'
    << "tilt_deg = " << num(cfg.tilt_deg) << '\n'
    << "rel_tol = " << num(cfg.rel_tol) << '\n'
    << "window = " << cfg.window << '\n'
    << "out = " << cfg.out << '\n';
  return o.str();
}

int num_steps(const RunConfig& cfg) { return static_cast<int>(std::llround(cfg.T / cfg.tau)); }

}  // namespace shapeflow::config
