#include "shapeflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "shapeflow/error.hpp"

namespace shapeflow::linalg {

namespace {

double rel_residual(const SpMat& a, const Vec& x, const Vec& b) {
  const double nb = b.norm();
  const double r = (a * x - b).norm();
  return nb > 0.0 ? r / nb : r;
}

}  // namespace

void TripletAssembler::add_block(const std::vector<int>& rows, const std::vector<int>& cols, const Mat& local) {
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) add(rows[a], cols[b], local(a, b));
}

SpMat TripletAssembler::build() const {
  SpMat m(rows_, cols_);
  m.setFromTriplets(triplets_.begin(), triplets_.end());
  m.makeCompressed();
  return m;
}

double SparseSystem::asymmetry() const {
  const SpMat t = matrix.transpose();
  const double scale = matrix.coeffs().size() ? matrix.coeffs().cwiseAbs().maxCoeff() : 1.0;
  const SpMat d = matrix - t;
  const double diff = d.coeffs().size() ? d.coeffs().cwiseAbs().maxCoeff() : 0.0;
  return scale > 0.0 ? diff / scale : diff;
}

struct SpdFactor::Impl {
  SpMat a;
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

SpdFactor::SpdFactor(const SpMat& a) : impl_(std::make_unique<Impl>()) {
  impl_->a = a;
  impl_->ldlt.compute(a);
  if (impl_->ldlt.info() != Eigen::Success) throw SolverError("LDL^T factorization failed", 1.0);
  if ((impl_->ldlt.vectorD().array() <= 0.0).any())
    throw SolverError("matrix flagged SPD has a non-positive pivot", 1.0);
}

SpdFactor::~SpdFactor() = default;
SpdFactor::SpdFactor(SpdFactor&&) noexcept = default;
SpdFactor& SpdFactor::operator=(SpdFactor&&) noexcept = default;

Vec SpdFactor::solve(const Vec& b, double tol) const {
  if (b.size() != impl_->a.rows()) throw SolverError("right side length does not match system", 1.0);
  Vec x = impl_->ldlt.solve(b);
  double res = rel_residual(impl_->a, x, b);
  for (int it = 0; it < 3 && res > tol; ++it) {
    x += impl_->ldlt.solve(b - impl_->a * x);
    res = rel_residual(impl_->a, x, b);
  }
  if (!(res <= tol)) throw SolverError("SPD solve did not reach tolerance", res);
  return x;
}

Mat SpdFactor::solve(const Mat& b) const { return impl_->ldlt.solve(b); }

Vec solve_spd(const SparseSystem& a, const Vec& b, double tol) {
  if (a.symmetry != Symmetry::kSpd) throw SolverError("solve_spd called on a system not flagged SPD", 1.0);
  return SpdFactor(a.matrix).solve(b, tol);
}

CgResult conjugate_gradient(const SparseSystem& a, const Vec& b, double tol, int max_iter) {
  const SpMat& A = a.matrix;
  const int n = a.dimension();
  if (max_iter < 0) max_iter = 10 * n;
  CgResult out;
  out.x = Vec::Zero(n);
  Vec r = b, p = r;
  double rr = r.squaredNorm();
  const double nb = std::max(b.norm(), 1e-300);
  out.residual = std::sqrt(rr) / nb;
  if (b.norm() == 0.0) {
    out.residual = 0.0;
    return out;
  }
  while (out.iterations < max_iter && out.residual > tol) {
    const Vec ap = A * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw SolverError("CG breakdown: matrix is not positive definite", out.residual);
    const double alpha = rr / pap;
    out.x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++out.iterations;
    out.residual = std::sqrt(rr) / nb;
    out.energy.push_back(0.5 * out.x.dot(A * out.x) - b.dot(out.x));
  }
  if (out.residual > tol) throw SolverError("CG did not converge within the iteration cap", out.residual);
  return out;
}

Vec solve_lu(const SpMat& a, const Vec& b, double tol) {
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw SolverError("sparse LU failed: " + lu.lastErrorMessage(), 1.0);
  Vec x = lu.solve(b);
  double res = rel_residual(a, x, b);
  for (int it = 0; it < 3 && res > tol; ++it) {
    x += lu.solve(b - a * x);
    res = rel_residual(a, x, b);
  }
  if (!(res <= tol)) throw SolverError("sparse LU solve did not reach tolerance", res);
  return x;
}

SaddleSolution solve_saddle(const SpMat& k, const SpMat& b, const Vec& f, const Vec& g, double tol) {
  const int n = static_cast<int>(k.rows()), m = static_cast<int>(b.rows());
  if (k.cols() != n || b.cols() != n || f.size() != n || g.size() != m)
    throw SolverError("saddle system blocks have inconsistent sizes", 1.0);
  {
    Vec row_norm = Vec::Zero(m);
    for (int c = 0; c < b.outerSize(); ++c)
      for (SpMat::InnerIterator it(b, c); it; ++it) row_norm[it.row()] += it.value() * it.value();
    for (int i = 0; i < m; ++i)
      if (row_norm[i] == 0.0)
        throw SolverError("rank-deficient constraint block: row " + std::to_string(i) + " is empty", 1.0);
  }
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(k.nonZeros() + 2 * b.nonZeros());
  for (int c = 0; c < k.outerSize(); ++c)
    for (SpMat::InnerIterator it(k, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int c = 0; c < b.outerSize(); ++c)
    for (SpMat::InnerIterator it(b, c); it; ++it) {
      t.emplace_back(n + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n + it.row(), it.value());
    }
  SpMat full(n + m, n + m);
  full.setFromTriplets(t.begin(), t.end());
  full.makeCompressed();
  Vec rhs(n + m);
  rhs << f, g;
  Vec x;
  try {
    x = solve_lu(full, rhs, tol);
  } catch (const SolverError& e) {
    throw SolverError(std::string("saddle solve failed, constraint block may be rank deficient: ") + e.what(),
                      e.residual());
  }
  SaddleSolution s;
  s.primal = x.head(n);
  s.multiplier = x.tail(m);
  s.residual = rel_residual(full, x, rhs);
  return s;
}

EigenPairs generalized_eigs(const SpMat& k, const SpMat& m, int count, double tol) {
  const int n = static_cast<int>(k.rows());
  if (count < 1) throw SolverError("eigenpair count must be positive", 1.0);
  if (count > n)
    throw SolverError("requested " + std::to_string(count) + " eigenpairs of a " + std::to_string(n) +
                          "-dimensional problem",
                      1.0);
  const int p = std::min(n, std::max(2 * count, count + 8));
  EigenPairs out;
  if (p == n) {
    const Mat kd(k), md(m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(kd, md);
    if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed", 1.0);
    out.values = es.eigenvalues().head(count);
    out.vectors = es.eigenvectors().leftCols(count);
    return out;
  }
  SpdFactor kinv(k);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Mat x(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = uni(rng);
  Vec lambda;
  for (int sweep = 0; sweep < 2000; ++sweep) {
    const Mat y = kinv.solve(Mat(m * x));
    const Mat kr = y.transpose() * (k * y);
    const Mat mr = y.transpose() * (m * y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (kr + kr.transpose()), 0.5 * (mr + mr.transpose()));
    if (es.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz eigensolver failed", 1.0);
    x = y * es.eigenvectors();
    lambda = es.eigenvalues();
    double worst = 0.0;
    for (int j = 0; j < count; ++j) {
      const Vec r = k * x.col(j) - lambda[j] * (m * x.col(j));
      worst = std::max(worst, r.norm() / (std::max(1.0, std::abs(lambda[j])) * x.col(j).norm()));
    }
    if (worst <= tol) {
      out.values = lambda.head(count);
      out.vectors = x.leftCols(count);
      return out;
    }
  }
  throw SolverError("subspace iteration did not converge", 1.0);
}

SpMat eliminate(const SpMat& a, const std::vector<bool>& fixed) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.nonZeros());
  for (int c = 0; c < a.outerSize(); ++c)
    for (SpMat::InnerIterator it(a, c); it; ++it)
      if (!fixed[it.row()] && !fixed[it.col()]) t.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < a.rows(); ++i)
    if (fixed[i]) t.emplace_back(i, i, 1.0);
  SpMat out(a.rows(), a.cols());
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

void apply_dirichlet(SpMat& a, Vec& b, const std::vector<bool>& fixed, const Vec& values) {
  Vec g = Vec::Zero(a.rows());
  for (int i = 0; i < a.rows(); ++i)
    if (fixed[i]) g[i] = values[i];
  b -= a * g;
  for (int i = 0; i < a.rows(); ++i)
    if (fixed[i]) b[i] = values[i];
  a = eliminate(a, fixed);
}

void dump(const std::filesystem::path& path, const SpMat& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (int c = 0; c < a.outerSize(); ++c)
    for (SpMat::InnerIterator it(a, c); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace shapeflow::linalg
