#include "shapeflow/bgn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "shapeflow/error.hpp"

namespace shapeflow::bgn {

namespace {

struct EdgeGeom {
  double len;
  Vec2 normal;
};

EdgeGeom edge_geom(const Curve& c, const Segment& s) {
  const Vec2 t = c.points[s[1]] - c.points[s[0]];
  const double len = t.norm();
  if (!(len > 0.0)) throw GeometryError("curve has a zero-length edge");
  return {len, Vec2(t.y(), -t.x()) / len};
}

void check_field(const Curve& c, const Vec& w, const char* what) {
  if (w.size() != 2 * static_cast<long>(c.points.size()))
    throw Error(std::string(what) + ": field must be blocked over the curve points");
}

}  // namespace

Curve closed_polygon(std::vector<Vec2> points) {
  Curve c;
  const int n = static_cast<int>(points.size());
  if (n < 3) throw GeometryError("closed polygon needs at least 3 points");
  c.points = std::move(points);
  for (int i = 0; i < n; ++i) c.edges.push_back({i, (i + 1) % n});
  return c;
}

Curve open_chain(std::vector<Vec2> points) {
  Curve c;
  const int n = static_cast<int>(points.size());
  if (n < 2) throw GeometryError("open chain needs at least 2 points");
  c.points = std::move(points);
  for (int i = 0; i + 1 < n; ++i) c.edges.push_back({i, i + 1});
  return c;
}

Curve boundary_curve(const mesh::SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask) {
  Curve c;
  c.points = mesh.vertices();
  const auto& edges = mesh.boundary_edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edge_mask.empty() || edge_mask[e]) c.edges.push_back(edges[e]);
  return c;
}

std::vector<int> active_nodes(const Curve& c) {
  std::vector<int> out;
  for (const auto& s : c.edges) {
    out.push_back(s[0]);
    out.push_back(s[1]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SpMat curve_stiffness(const Curve& c) {
  const int n = static_cast<int>(c.points.size());
  linalg::TripletAssembler a(n, n);
  for (const auto& s : c.edges) {
    const double k = 1.0 / edge_geom(c, s).len;
    a.add(s[0], s[0], k);
    a.add(s[1], s[1], k);
    a.add(s[0], s[1], -k);
    a.add(s[1], s[0], -k);
  }
  return a.build();
}

SpMat curve_mass(const Curve& c) {
  const int n = static_cast<int>(c.points.size());
  linalg::TripletAssembler a(n, n);
  for (const auto& s : c.edges) {
    const double len = edge_geom(c, s).len;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a.add(s[i], s[j], len * (i == j ? 2.0 : 1.0) / 6.0);
  }
  return a.build();
}

std::vector<Vec2> lumped_normals(const Curve& c) {
  std::vector<Vec2> w(c.points.size(), Vec2::Zero());
  for (const auto& s : c.edges) {
    const EdgeGeom g = edge_geom(c, s);
    w[s[0]] += 0.5 * g.len * g.normal;
    w[s[1]] += 0.5 * g.len * g.normal;
  }
  return w;
}

double enclosed_area(const Curve& c) {
  double a = 0.0;
  for (const auto& s : c.edges) {
    const Vec2& p = c.points[s[0]];
    const Vec2& q = c.points[s[1]];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double edge_length_ratio(const Curve& c) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& s : c.edges) {
    const double l = (c.points[s[1]] - c.points[s[0]]).norm();
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  return hi / lo;
}

double adaptive_alpha(const Curve& c, const Vec& w) {
  check_field(c, w, "adaptive_alpha");
  const long n = static_cast<long>(c.points.size());
  const SpMat m = curve_mass(c);
  double s = 0.0;
  for (int k = 0; k < 2; ++k) {
    const Vec wk = w.segment(k * n, n);
    s += wk.dot(m * wk);
  }
  return std::sqrt(std::max(s, 0.0));
}

Vec init_curvature(const Curve& c) {
  const long n = static_cast<long>(c.points.size());
  const SpMat a = curve_stiffness(c);
  const auto omega = lumped_normals(c);
  Vec x(n), y(n);
  for (long i = 0; i < n; ++i) {
    x[i] = c.points[i].x();
    y[i] = c.points[i].y();
  }
  const Vec ax = a * x, ay = a * y;
  Vec h = Vec::Zero(n);
  for (int i : active_nodes(c)) {
    const double w2 = omega[i].squaredNorm();
    if (w2 > 0.0) h[i] = (omega[i].x() * ax[i] + omega[i].y() * ay[i]) / w2;
  }
  return h;
}

struct BgnSystem::Impl {
  std::vector<int> nodes;
  std::vector<int> local;  // point -> local index or -1
  std::vector<Vec2> omega;
  SpMat matrix;
  Vec ax;  // (A X) in local numbering, x then y
  Eigen::SparseLU<SpMat> lu;
  Curve curve;
};

BgnSystem::BgnSystem(const Curve& c, double alpha, double tau) : impl_(std::make_unique<Impl>()), alpha_(alpha) {
  if (!(alpha >= 0.0)) throw Error("bgn: alpha must be non-negative");
  if (!(tau > 0.0)) throw Error("bgn: tau must be positive");
  Impl& s = *impl_;
  s.curve = c;
  s.nodes = active_nodes(c);
  const int m = static_cast<int>(s.nodes.size());
  if (m == 0) throw GeometryError("bgn: curve has no edges");
  s.local.assign(c.points.size(), -1);
  for (int i = 0; i < m; ++i) s.local[s.nodes[i]] = i;
  s.omega = lumped_normals(c);

  // local stiffness
  linalg::TripletAssembler al(m, m);
  for (const auto& e : c.edges) {
    const double k = 1.0 / edge_geom(c, e).len;
    const int p = s.local[e[0]], q = s.local[e[1]];
    al.add(p, p, k);
    al.add(q, q, k);
    al.add(p, q, -k);
    al.add(q, p, -k);
  }
  const SpMat a = al.build();

  // unknowns: [w_x (m), w_y (m), H (m)]
  linalg::TripletAssembler t(3 * m, 3 * m);
  for (int i = 0; i < m; ++i) {
    const Vec2& om = s.omega[s.nodes[i]];
    t.add(i, i, om.x());
    t.add(i, m + i, om.y());
    t.add(m + i, 2 * m + i, om.x());
    t.add(2 * m + i, 2 * m + i, om.y());
  }
  for (int col = 0; col < a.outerSize(); ++col)
    for (SpMat::InnerIterator it(a, col); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      t.add(i, 2 * m + j, alpha * it.value());
      t.add(m + i, j, -tau * it.value());
      t.add(2 * m + i, m + j, -tau * it.value());
    }
  s.matrix = t.build();

  Vec x(m), y(m);
  for (int i = 0; i < m; ++i) {
    x[i] = c.points[s.nodes[i]].x();
    y[i] = c.points[s.nodes[i]].y();
  }
  s.ax.resize(2 * m);
  s.ax << a * x, a * y;

  s.lu.analyzePattern(s.matrix);
  s.lu.factorize(s.matrix);
  if (s.lu.info() != Eigen::Success) throw SolverError("bgn: singular system, degenerate curve", 1.0);
}

BgnSystem::~BgnSystem() = default;
BgnSystem::BgnSystem(BgnSystem&&) noexcept = default;
BgnSystem& BgnSystem::operator=(BgnSystem&&) noexcept = default;

BgnSolution BgnSystem::solve(const Vec& w_tilde) const {
  const Impl& s = *impl_;
  const Curve& c = s.curve;
  check_field(c, w_tilde, "bgn");
  const long n = static_cast<long>(c.points.size());
  const int m = static_cast<int>(s.nodes.size());
  Vec rhs(3 * m);
  for (int i = 0; i < m; ++i) {
    const int p = s.nodes[i];
    rhs[i] = s.omega[p].dot(Vec2(w_tilde[p], w_tilde[n + p]));
  }
  rhs.tail(2 * m) = s.ax;
  const Vec z = s.lu.solve(rhs);
  const double res = (s.matrix * z - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (!z.allFinite() || res > 1e-9) throw SolverError("bgn: solve failed", res);

  BgnSolution out;
  out.w_hat = Vec::Zero(2 * n);
  out.H = Vec::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int p = s.nodes[i];
    out.w_hat[p] = z[i];
    out.w_hat[n + p] = z[m + i];
    out.H[p] = z[2 * m + i];
  }
  return out;
}

BgnSolution bgn_regularize(const Curve& c, const Vec& w_tilde, double alpha, double tau) {
  return BgnSystem(c, alpha, tau).solve(w_tilde);
}

Curve advance(const Curve& c, const Vec& w_hat, double tau) {
  check_field(c, w_hat, "advance");
  const long n = static_cast<long>(c.points.size());
  Curve out = c;
  for (long i = 0; i < n; ++i) out.points[i] += tau * Vec2(w_hat[i], w_hat[n + i]);
  return out;
}

}  // namespace shapeflow::bgn
