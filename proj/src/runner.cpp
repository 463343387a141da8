#include "shapeflow/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shapeflow/bgn.hpp"
#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"
#include "shapeflow/mdr.hpp"
#include "shapeflow/mesh_io.hpp"
#include "shapeflow/willmore.hpp"

namespace shapeflow::runner {

namespace fs = std::filesystem;
using config::Flow;
using config::Model;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mesh_%06d.off", step);
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
}

std::string manifest_text(const RunConfig& cfg, const RunResult& r, int vertices, int triangles) {
  std::ostringstream o;
  std::istringstream cfg_lines(config::to_text(cfg));
  std::string line;
  while (std::getline(cfg_lines, line)) {
    const auto eq = line.find(" = ");
    o << line.substr(0, eq) << ": " << line.substr(eq + 3) << '\n';
  }
  o << "steps: " << config::num_steps(cfg) << '\n'
    << "steps_run: " << r.steps << '\n'
    << "early_stopped: " << (r.early_stopped ? "true" : "false") << '\n'
    << "mesh_vertices: " << vertices << '\n'
    << "mesh_triangles: " << triangles << '\n';
  if (!r.history.empty()) {
    o << "initial_J: " << fmt(r.history.front().J) << '\n' << "final_J: " << fmt(r.history.back().J) << '\n';
  }
  o << "exit_code: " << r.exit_code << '\n'
    << "status: " << (r.exit_code == kOk ? "ok" : r.exit_code == kConfigError ? "config error" : "numerical failure")
    << '\n';
  if (!r.message.empty()) o << "message: " << r.message << '\n';
  return o.str();
}

HistoryRow row_2d(const flow::FlowState& s, const flow::FlowParams& p, double J) {
  const flow::EnergyRecord e = flow::mechanical_energy(s, p, J);
  const mesh::MeshQualityReport q = mesh::quality_report(s.current);
  return {s.step, s.time, J, e.mechanical, e.eta, mesh::enclosed_measure(s.current), q.min_angle, q.edge_length_ratio};
}

RunResult run_planar(const RunConfig& cfg, const RunOptions& opt) {
  RunResult res;
  const fs::path out = cfg.out;
  const mesh::SimplicialMesh2D m0 = load_mesh_2d(cfg.mesh);
  auto model = make_model(cfg);
  const flow::FlowParams p = flow_params(cfg);
  const int steps = config::num_steps(cfg);
  const std::vector<bool> fixed = model->fixed_vertices(m0);
  bool any_fixed = false;
  for (bool f : fixed) any_fixed = any_fixed || f;
  const std::vector<bool> free = free_edges(m0, fixed);

  if (opt.write_artifacts) fs::create_directories(out);
  auto snapshot = [&](const flow::FlowState& s) {
    if (opt.write_artifacts) mesh::write_off(out / snapshot_name(s.step), s.current);
  };

  flow::FlowState s = flow::initial_state(m0);
  flow::EarlyStop stop(cfg.stop_tol, 10);
  try {
    double J = model->evaluate(s.current);
    res.history.push_back(row_2d(s, p, J));
    stop.update(J);
    snapshot(s);
    for (int n = 0; n < steps; ++n) {
      // Step 1: state (and adjoint) on the current domain, cached by the model
      const Vec g = model->gradient(s.current);
      // Step 2: inertial velocity
      flow::StepConstraints cons;
      if (any_fixed) cons.fixed = fixed;
      if (model->volume_constrained()) cons.volume_gradient = models::volume_gradient(s.current);
      const Vec wt = flow::inertial_step(s, p, g, cons);
      // Step 3: surface-diffusion regularized boundary velocity
      Vec w_hat;
      const bool use_bgn = cfg.flow == Flow::kInertialBgnMdr || cfg.flow == Flow::kInertialBgnHarmonic;
      if (use_bgn) {
        const bgn::Curve curve = bgn::boundary_curve(s.current, free);
        const double alpha = bgn::adaptive_alpha(curve, wt);
        w_hat = bgn::BgnSystem(curve, alpha, p.tau).solve(wt).w_hat;
      }
      // Step 4: domain velocity
      Vec w;
      switch (cfg.flow) {
        case Flow::kH1:
        case Flow::kInertial: w = wt; break;
        case Flow::kInertialMdr: w = mdr::solve_mdr_velocity(s.current, wt).w; break;
        case Flow::kInertialBgnMdr: w = mdr::solve_mdr_velocity(s.current, w_hat).w; break;
        case Flow::kInertialBgnHarmonic: w = mdr::harmonic_extension(s.current, w_hat); break;
      }
      if (opt.observer) opt.observer({&s, &wt, use_bgn ? &w_hat : nullptr, &w});
      // Step 5: move the mesh
      s = flow::advance(s, p, wt, w);
      J = model->evaluate(s.current);
      res.history.push_back(row_2d(s, p, J));
      res.steps = s.step;
      if (s.step % cfg.snapshot_every == 0) snapshot(s);
      if (stop.update(J)) {
        res.early_stopped = true;
        break;
      }
    }
    if (s.step % cfg.snapshot_every != 0) snapshot(s);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    res.exit_code = kNumericalFailure;
    res.message = std::string("step ") + std::to_string(s.step) + ": " + e.what();
  }
  if (opt.write_artifacts) {
    write_text(out / "history.csv", history_csv(res.history, false));
    write_text(out / "manifest.txt", manifest_text(cfg, res, m0.num_vertices(), m0.num_triangles()));
  }
  return res;
}

RunResult run_holefill(const RunConfig& cfg, const RunOptions& opt) {
  RunResult res;
  const fs::path out = cfg.out;
  willmore::SurfacePatch patch = willmore::make_fixture(cfg.mesh, cfg.mu_out, cfg.tilt_deg);
  patch.eps0 = cfg.eps0;
  patch.tau = cfg.tau;
  if (opt.write_artifacts) fs::create_directories(out);
  auto snapshot = [&](int step) {
    if (opt.write_artifacts) mesh::write_off(out / snapshot_name(step), patch.surface);
  };
  auto row = [&](int step) {
    const willmore::WillmoreRecord r = willmore::record(patch);
    const mesh::MeshQualityReport q = mesh::quality_report(patch.surface);
    res.history.push_back({step, step * cfg.tau, r.energy, r.energy + willmore::kinetic_energy(patch),
                           r.misfit_deg, mesh::surface_area(patch.surface), q.min_angle, q.edge_length_ratio});
  };
  const int steps = config::num_steps(cfg);
  int n = 0;
  try {
    row(0);
    snapshot(0);
    int streak = 0;
    for (n = 1; n <= steps; ++n) {
      willmore::willmore_step(patch);
      row(n);
      res.steps = n;
      if (n % cfg.snapshot_every == 0) snapshot(n);
      const double e0 = res.history[res.history.size() - 2].J, e1 = res.history.back().J;
      streak = std::abs(e1 - e0) / std::max(e0, 1e-16) < cfg.rel_tol ? streak + 1 : 0;
      if (streak >= cfg.window) {
        res.early_stopped = true;
        break;
      }
    }
    if (res.steps % cfg.snapshot_every != 0) snapshot(res.steps);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    res.exit_code = kNumericalFailure;
    res.message = std::string("step ") + std::to_string(n) + ": " + e.what();
  }
  if (opt.write_artifacts) {
    write_text(out / "history.csv", history_csv(res.history, true));
    write_text(out / "manifest.txt",
               manifest_text(cfg, res, patch.surface.num_vertices(), patch.surface.num_triangles()));
  }
  return res;
}

}  // namespace

mesh::SimplicialMesh2D load_mesh_2d(const std::string& name) {
  const fs::path data = SHAPEFLOW_DATA_DIR;
  if (name == "disk-2842") return mesh::read_mesh(data / "disk_2842.off");
  if (name == "lshape") return mesh::read_mesh(data / "lshape.off");
  if (name == "unit-square") return mesh::read_mesh(data / "unit_square.off");
  if (name == "obstacle-channel") return mesh::read_node_ele(data / "obstacle_channel");
  if (!fs::exists(name) && !fs::exists(name + ".node.csv"))
    throw ConfigError("mesh '" + name + "' is neither a fixture nor an existing file");
  if (name.ends_with(".node.csv")) return mesh::read_node_ele(name.substr(0, name.size() - 9));
  if (fs::exists(name + ".node.csv")) return mesh::read_node_ele(name);
  return mesh::read_mesh(name);
}

std::unique_ptr<models::ShapeModel> make_model(const RunConfig& cfg) {
  switch (cfg.model) {
    case Model::kReconstruct:
      return std::make_unique<models::ReconstructionModel>(models::recon_preset(cfg.u_d));
    case Model::kDrag: {
      stokes::StokesProblem pr = models::drag_preset(cfg.inflow, cfg.mu);
      pr.force = Vec2(cfg.force_x, cfg.force_y);
      return std::make_unique<models::DragModel>(pr);
    }
    case Model::kEigen: return std::make_unique<models::EigenvalueModel>(cfg.ell, cfg.gap_tol);
    case Model::kHolefill: break;
  }
  throw ConfigError("model " + config::to_string(cfg.model) + " has no planar shape model");
}

flow::FlowParams flow_params(const RunConfig& cfg) {
  flow::FlowParams p;
  p.tau = cfg.tau;
  p.eps0 = cfg.flow == Flow::kH1 ? 0.0 : cfg.eps0;
  p.c = cfg.c;
  p.t0 = cfg.t0;
  p.constant_damping = cfg.flow == Flow::kH1;
  if (p.constant_damping) p.c = 1.0;
  return p;
}

std::vector<bool> free_edges(const mesh::SimplicialMesh2D& mesh, const std::vector<bool>& fixed) {
  std::vector<bool> out;
  for (const auto& e : mesh.boundary_edges()) out.push_back(fixed.empty() || (!fixed[e[0]] && !fixed[e[1]]));
  return out;
}

std::string history_csv(const std::vector<HistoryRow>& rows, bool holefill) {
  std::ostringstream o;
  o << (holefill ? "step,time,willmore_energy,mech_energy,conormal_misfit_deg,volume,min_angle,edge_length_ratio\n"
                 : "step,time,J,mech_energy,eta,volume,min_angle,edge_length_ratio\n");
  for (const HistoryRow& r : rows)
    o << r.step << ',' << fmt(r.time) << ',' << fmt(r.J) << ',' << fmt(r.mech_energy) << ',' << fmt(r.eta) << ','
      << fmt(r.volume) << ',' << fmt(r.min_angle) << ',' << fmt(r.edge_length_ratio) << '\n';
  return o.str();
}

RunResult run(const RunConfig& cfg, const RunOptions& opt) {
  try {
    config::validate(cfg);
    return cfg.model == Model::kHolefill ? run_holefill(cfg, opt) : run_planar(cfg, opt);
  } catch (const ConfigError& e) {
    RunResult r;
    r.exit_code = kConfigError;
    r.message = e.what();
    return r;
  } catch (const Error& e) {
    RunResult r;
    r.exit_code = kNumericalFailure;
    r.message = e.what();
    return r;
  }
}

CompareResult compare(RunConfig a, RunConfig b, const fs::path& out) {
  CompareResult c;
  a.out = (out / "a").string();
  b.out = (out / "b").string();
  c.a = run(a);
  c.b = run(b);
  fs::create_directories(out);
  const bool valid = !c.a.history.empty() && !c.b.history.empty();
  c.final_ratio = valid ? c.a.history.back().J / c.b.history.back().J : NAN;

  std::ostringstream csv;
  csv << "step,J_a,J_b,min_angle_a,min_angle_b\n";
  const std::size_t rows = std::max(c.a.history.size(), c.b.history.size());
  for (std::size_t i = 0; i < rows; ++i) {
    csv << i;
    for (const auto* h : {&c.a.history, &c.b.history}) csv << ',' << (i < h->size() ? fmt((*h)[i].J) : "");
    for (const auto* h : {&c.a.history, &c.b.history}) csv << ',' << (i < h->size() ? fmt((*h)[i].min_angle) : "");
    csv << '\n';
  }
  write_text(out / "compare.csv", csv.str());

  std::ostringstream sum;
  sum << "exit_code_a: " << c.a.exit_code << '\n' << "exit_code_b: " << c.b.exit_code << '\n';
  if (valid) {
    sum << "final_J_a: " << fmt(c.a.history.back().J) << '\n'
        << "final_J_b: " << fmt(c.b.history.back().J) << '\n'
        << "final_J_ratio: " << fmt(c.final_ratio) << '\n'
        << "final_min_angle_a: " << fmt(c.a.history.back().min_angle) << '\n'
        << "final_min_angle_b: " << fmt(c.b.history.back().min_angle) << '\n';
  }
  write_text(out / "summary.txt", sum.str());
  return c;
}

}  // namespace shapeflow::runner
