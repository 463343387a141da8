#include "shapeflow/checks.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

#include "shapeflow/bgn.hpp"
#include "shapeflow/generators.hpp"
#include "shapeflow/mdr.hpp"
#include "shapeflow/models.hpp"
#include "shapeflow/stokes.hpp"
#include "shapeflow/willmore.hpp"

namespace shapeflow::checks {

namespace {

constexpr double kPi = std::numbers::pi;
using linalg::Vec;
using mesh::SimplicialMesh2D;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

CheckRow at_most(std::string name, double value, double tol) {
  return {std::move(name), value, "<= " + num(tol), value <= tol};
}

std::vector<Vec2> field(const SimplicialMesh2D& m, const std::function<Vec2(const Vec2&)>& f) {
  std::vector<Vec2> v;
  for (const auto& p : m.vertices()) v.push_back(f(p));
  return v;
}

Vec2 dir_a(const Vec2& p) { return {std::cos(p.x() + 2.0 * p.y()), 0.5 * std::sin(p.x() - p.y())}; }
Vec2 dir_b(const Vec2& p) { return {p.x() * p.x() - p.y(), p.x() * p.y()}; }

void fd_rows(std::vector<CheckRow>& out, const std::string& tag, models::ShapeModel& model,
             const std::vector<SimplicialMesh2D>& meshes, const std::vector<std::function<Vec2(const Vec2&)>>& dirs) {
  for (std::size_t i = 0; i < meshes.size(); ++i)
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const models::FdReport r = models::fd_check(model, meshes[i], field(meshes[i], dirs[d]));
      out.push_back({"fd slope " + tag + " mesh" + std::to_string(i) + " dir" + std::to_string(d), r.slope,
                     "in [0.8, 1.2]", r.pass});
    }
}

}  // namespace

std::vector<CheckRow> run_checks() {
  std::vector<CheckRow> rows;

  {
    models::ReconstructionModel m(models::recon_preset("recon-case1"));
    fd_rows(rows, "recon", m, {mesh::disk(1.0, 5, 6.3), mesh::disk(1.0, 8, 6.3), mesh::disk(1.0, 11, 6.3)},
            {dir_a, dir_b});
  }
  {
    models::DragModel m(models::drag_preset("drag-case1"));
    auto bump = [](const Vec2& p) { return std::sin(kPi * (p.x() + 0.5) / 2.0) * std::cos(kPi * p.y()); };
    const std::vector<SimplicialMesh2D> meshes{
        mesh::rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.2, 0.2, -0.15, 0.15, 0.05),
        mesh::rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.2, 0.2, -0.15, 0.15, 0.025),
        mesh::rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.25, 0.25, -0.25, 0.25, 0.0625)};
    fd_rows(rows, "drag", m, meshes,
            {[&](const Vec2& p) -> Vec2 { return bump(p) * Vec2(1.0, 0.0); },
             [&](const Vec2& p) -> Vec2 { return bump(p) * Vec2(0.2, 1.0); }});
  }
  {
    models::EigenvalueModel m(1, 1e-2);
    fd_rows(rows, "eigen", m, {mesh::unit_square(6), mesh::unit_square(10), mesh::unit_square(14)}, {dir_a, dir_b});
  }

  {
    const auto m = mesh::channel(0.0, 2.0, -0.5, 0.5, 32, 16);
    stokes::StokesProblem pr;
    pr.inflow = [](const Vec2& x) { return Vec2(-(x.y() - 0.5) * (x.y() + 0.5), 0.0); };
    const auto s = stokes::solve(m, pr);
    const double j = stokes::dissipation(m, pr.mu, s.space, s.velocity);
    rows.push_back(at_most("Poiseuille dissipation rel. error", std::abs(j - 2.0 / 3.0) / (2.0 / 3.0), 0.02));
  }

  {
    const auto disk = mesh::disk(1.0, 8, 2.0 * kPi);
    const Vec tr = mesh::pack(field(disk, [](const Vec2&) { return Vec2(1.0, 0.0); }));
    const Vec rot = mesh::pack(field(disk, [](const Vec2& p) { return Vec2(-p.y(), p.x()); }));
    rows.push_back(at_most("MDR energy, translation data", mdr::solve_mdr_velocity(disk, tr).energy, 1e-10));
    rows.push_back(at_most("MDR energy, rotation data", mdr::solve_mdr_velocity(disk, rot).energy, 1e-10));
    const auto fine = mesh::disk(1.0, 16, 2.0 * kPi);
    const auto s = mdr::solve_mdr_velocity(fine, mesh::pack(field(fine, [](const Vec2& p) -> Vec2 { return p; })));
    double worst = 0.0;
    for (int v : fine.boundary_vertices()) worst = std::max(worst, std::abs(s.kappa[v] - 1.0));
    rows.push_back(at_most("MDR dilation |kappa - 1|", worst, 0.05));
  }

  {
    const auto c = bgn::closed_polygon(mesh::ellipse_polygon(1.0, 1.0, 128));
    const Vec zero = Vec::Zero(256);
    const auto s = bgn::bgn_regularize(c, zero, 1.0, 0.01);
    double l2 = 0.0;
    for (const auto& e : c.edges) {
      const Vec2 t = c.points[e[1]] - c.points[e[0]];
      const double len = t.norm();
      const Vec2 n(t.y() / len, -t.x() / len);
      const double a = Vec2(s.w_hat[e[0]], s.w_hat[128 + e[0]]).dot(n);
      const double b = Vec2(s.w_hat[e[1]], s.w_hat[128 + e[1]]).dot(n);
      l2 += len / 3.0 * (a * a + a * b + b * b);
    }
    rows.push_back(at_most("BGN circle ||w.n||", std::sqrt(l2), 1e-8));
  }

  {
    willmore::SurfacePatch p = willmore::make_fixture("flat-disk", "tilt", 0.0);
    willmore::willmore_step(p);
    rows.push_back(at_most("Willmore flat disk max |w|", willmore::record(p).velocity_norm, 1e-8));
    const double e = willmore::willmore_energy(mesh::icosphere(1.0, 3));
    rows.push_back(at_most("Willmore unit sphere rel. error vs 16 pi", std::abs(e - 16.0 * kPi) / (16.0 * kPi), 0.03));
  }
  return rows;
}

std::string format_table(const std::vector<CheckRow>& rows) {
  std::ostringstream o;
  int fails = 0;
  for (const CheckRow& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-4s  %-44s %12.4g  %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value,
                  r.bound.c_str());
    o << line;
    fails += r.pass ? 0 : 1;
  }
  o << rows.size() - fails << " passed, " << fails << " failed\n";
  return o.str();
}

}  // namespace shapeflow::checks
