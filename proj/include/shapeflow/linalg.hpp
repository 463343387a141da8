#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace shapeflow::linalg {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Symmetry { kSpd, kIndefinite };

/// Coordinate-list accumulator; duplicate entries are summed on build, so
/// element contributions may arrive in any order.
class TripletAssembler {
 public:
  TripletAssembler(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int i, int j, double v) {
    if (v != 0.0) triplets_.emplace_back(i, j, v);
  }
  /// Scatters a dense local block: rows[a], cols[b] <- local(a, b).
  void add_block(const std::vector<int>& rows, const std::vector<int>& cols, const Mat& local);
  void reserve(std::size_t n) { triplets_.reserve(n); }

  SpMat build() const;
  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_, cols_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

struct SparseSystem {
  SpMat matrix;
  Symmetry symmetry = Symmetry::kSpd;

  int dimension() const { return static_cast<int>(matrix.rows()); }
  /// max |A - A^T| relative to max |A|
  double asymmetry() const;
};

constexpr double kDefaultTol = 1e-10;

/// Sparse Cholesky (LDL^T) with iterative refinement. Throws SolverError if the
/// relative residual stays above tol.
Vec solve_spd(const SparseSystem& a, const Vec& b, double tol = kDefaultTol);

/// Reusable factorization of an SPD matrix.
class SpdFactor {
 public:
  explicit SpdFactor(const SpMat& a);
  ~SpdFactor();
  SpdFactor(SpdFactor&&) noexcept;
  SpdFactor& operator=(SpdFactor&&) noexcept;
  Vec solve(const Vec& b, double tol = kDefaultTol) const;
  Mat solve(const Mat& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct CgResult {
  Vec x;
  int iterations = 0;
  double residual = 0.0;
  /// Energy 1/2 x^T A x - b^T x after each accepted iterate.
  std::vector<double> energy;
};

/// Plain conjugate gradients. max_iter < 0 means 10 * dimension.
CgResult conjugate_gradient(const SparseSystem& a, const Vec& b, double tol = kDefaultTol, int max_iter = -1);

struct SaddleSolution {
  Vec primal;
  Vec multiplier;
  double residual = 0.0;  ///< relative block residual
};

/// Solves [K B^T; B 0] [x; y] = [f; g] with one sparse LU factorization.
/// Throws SolverError on an empty constraint row, a singular factorization
/// or a residual above tol.
SaddleSolution solve_saddle(const SpMat& k, const SpMat& b, const Vec& f, const Vec& g, double tol = 1e-9);

/// General sparse solve by LU, with residual check.
Vec solve_lu(const SpMat& a, const Vec& b, double tol = 1e-9);

struct EigenPairs {
  Vec values;    ///< ascending
  Mat vectors;   ///< M-orthonormal columns
};

/// The `count` smallest eigenpairs of K x = lambda M x by shift-invert
/// subspace iteration around zero with Rayleigh-Ritz in a subspace of size
/// min(n, max(2 count, count + 8)).
EigenPairs generalized_eigs(const SpMat& k, const SpMat& m, int count, double tol = 1e-10);

/// Symmetric Dirichlet elimination: fixed rows and columns become identity,
/// the right side receives -A[:, fixed] * values and values on fixed rows.
void apply_dirichlet(SpMat& a, Vec& b, const std::vector<bool>& fixed, const Vec& values);

/// Zeroes-out elimination without touching b, for matrices reused across right sides.
SpMat eliminate(const SpMat& a, const std::vector<bool>& fixed);

/// "row col value" per line, 0-based.
void dump(const std::filesystem::path& path, const SpMat& a);

}  // namespace shapeflow::linalg
