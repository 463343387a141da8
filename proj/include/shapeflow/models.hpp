#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "shapeflow/linalg.hpp"
#include "shapeflow/mesh.hpp"
#include "shapeflow/stokes.hpp"

namespace shapeflow::models {

using linalg::Mat;
using linalg::SpMat;
using linalg::Vec;
using mesh::SimplicialMesh2D;

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

// ---------------------------------------------------------------- reconstruction

/// -Laplace u + u = f, u = 0 on the boundary, J = 1/2 int (u - u_d)^2.
struct ReconData {
  ScalarField f;
  ScalarField u_d;
  VectorField grad_u_d;
};

/// "recon-case1": u_d = 1 - 0.8 x^2 - 2.25 y^2, "recon-case2": u_d = 1 - x^2 - 2.25 y^2.
/// In both f = -Laplace u_d + u_d, so u_d is the state on the ellipse {u_d = 0}
/// and J vanishes there.
ReconData recon_preset(const std::string& name);

struct ReconState {
  Vec u;
  Vec p;  ///< adjoint, -Laplace p + p = u - u_d
};
ReconState recon_solve(const SimplicialMesh2D& mesh, const ReconData& data);
/// 1/2 int (u - u_d)^2 by the degree-4 rule.
double recon_objective(const SimplicialMesh2D& mesh, const Vec& u, const ReconData& data);
/// Volume form of the Eulerian derivative, blocked 2N.
Vec recon_dJ(const SimplicialMesh2D& mesh, const ReconState& s, const ReconData& data);

// ---------------------------------------------------------------- drag

/// "drag-case1": inflow (-(y - 0.5)(y + 0.5), 0), mu = 1, f = 0.
stokes::StokesProblem drag_preset(const std::string& name, double mu = 1.0);
/// Vertices on inlet, wall and outlet edges: they never move.
std::vector<bool> outer_boundary_vertices(const SimplicialMesh2D& mesh);
/// Drag derivative with entries on outer-boundary vertices zeroed.
Vec stokes_dJ(const SimplicialMesh2D& mesh, const stokes::StokesProblem& problem, const stokes::StokesSolution& s);

// ---------------------------------------------------------------- eigenvalue

struct EigenState {
  Vec values;   ///< ascending
  Mat vectors;  ///< one column per eigenfunction, full nodal length, zero on the boundary, M-orthonormal
};
/// The `count` smallest Dirichlet eigenpairs of -Laplace.
EigenState eigen_solve(const SimplicialMesh2D& mesh, int count);
/// 0-based indices of eigenvalues within gap_tol (relative, chained) of lambda_ell.
std::vector<int> eigen_cluster(const Vec& values, int ell, double gap_tol);
/// Derivative of lambda_ell (1-based ell), averaged over its cluster.
Vec eigen_dJ(const SimplicialMesh2D& mesh, const EigenState& s, int ell, double gap_tol);

// ---------------------------------------------------------------- models

enum class ModelKind { kReconstruction, kStokesDrag, kEigenvalue };

/// State solve, objective and derivative on one mesh. Cached fields are tied
/// to the mesh they were computed on; asking for them with another mesh
/// raises StaleStateError.
class ShapeModel {
 public:
  virtual ~ShapeModel() = default;

  virtual ModelKind kind() const = 0;
  virtual bool volume_constrained() const = 0;
  /// Vertices that must stay put (their velocity is held at zero).
  virtual std::vector<bool> fixed_vertices(const SimplicialMesh2D& mesh) const;

  void solve(const SimplicialMesh2D& mesh);
  double objective(const SimplicialMesh2D& mesh) const;
  /// dJ(v) = g . pack(v); zero on fixed vertices.
  Vec gradient(const SimplicialMesh2D& mesh) const;
  /// solve + objective
  double evaluate(const SimplicialMesh2D& mesh);

 protected:
  virtual void do_solve(const SimplicialMesh2D& mesh) = 0;
  virtual double do_objective(const SimplicialMesh2D& mesh) const = 0;
  virtual Vec do_gradient(const SimplicialMesh2D& mesh) const = 0;
  void check_current(const SimplicialMesh2D& mesh) const;

 private:
  std::uint64_t fingerprint_ = 0;
  bool solved_ = false;
};

std::uint64_t fingerprint(const SimplicialMesh2D& mesh);

class ReconstructionModel final : public ShapeModel {
 public:
  explicit ReconstructionModel(ReconData data) : data_(std::move(data)) {}
  ModelKind kind() const override { return ModelKind::kReconstruction; }
  bool volume_constrained() const override { return false; }
  const ReconState& state(const SimplicialMesh2D& mesh) const;
  const ReconData& data() const { return data_; }

 protected:
  void do_solve(const SimplicialMesh2D& mesh) override;
  double do_objective(const SimplicialMesh2D& mesh) const override;
  Vec do_gradient(const SimplicialMesh2D& mesh) const override;

 private:
  ReconData data_;
  ReconState state_;
};

class DragModel final : public ShapeModel {
 public:
  explicit DragModel(stokes::StokesProblem problem) : problem_(std::move(problem)) {}
  ModelKind kind() const override { return ModelKind::kStokesDrag; }
  bool volume_constrained() const override { return true; }
  std::vector<bool> fixed_vertices(const SimplicialMesh2D& mesh) const override;
  const stokes::StokesSolution& state(const SimplicialMesh2D& mesh) const;

 protected:
  void do_solve(const SimplicialMesh2D& mesh) override;
  double do_objective(const SimplicialMesh2D& mesh) const override;
  Vec do_gradient(const SimplicialMesh2D& mesh) const override;

 private:
  stokes::StokesProblem problem_;
  stokes::StokesSolution state_;
};

class EigenvalueModel final : public ShapeModel {
 public:
  /// ell is 1-based.
  EigenvalueModel(int ell, double gap_tol) : ell_(ell), gap_tol_(gap_tol) {}
  ModelKind kind() const override { return ModelKind::kEigenvalue; }
  bool volume_constrained() const override { return true; }
  const EigenState& state(const SimplicialMesh2D& mesh) const;
  int ell() const { return ell_; }

 protected:
  void do_solve(const SimplicialMesh2D& mesh) override;
  double do_objective(const SimplicialMesh2D& mesh) const override;
  Vec do_gradient(const SimplicialMesh2D& mesh) const override;

 private:
  int ell_;
  double gap_tol_;
  EigenState state_;
};

// ---------------------------------------------------------------- checks and constraints

struct FdRow {
  double eps;
  double quotient;  ///< (J(X + eps v) - J(X)) / eps
  double error;     ///< |dJ(v) - quotient|
};
struct FdReport {
  double dj = 0.0;
  std::vector<FdRow> rows;
  double slope = 0.0;  ///< least-squares log-log slope of error against eps; NaN if every error is 0
  bool pass = false;   ///< slope in [0.8, 1.2], or every error exactly 0
};
/// Forward-difference check of the model derivative along the vertex field v.
FdReport fd_check(ShapeModel& model, const SimplicialMesh2D& mesh, const std::vector<Vec2>& direction,
                  const std::vector<double>& eps = {1e-2, 1e-3, 1e-4, 1e-5});

/// Area derivative: d|Omega|(v) = c . pack(v) with c_(i) = sum over incident
/// boundary edges of (L_e / 2) n_e, restricted to the given edges.
Vec volume_gradient(const SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask = {});

/// Nodal normal data minus the constant c = (int data) / |Gamma_free| on the
/// free boundary, so that its boundary integral vanishes.
Vec volume_project(const SimplicialMesh2D& mesh, const Vec& normal_data, const std::vector<bool>& edge_mask = {});
/// Vector field minus c z with c chosen so that the flux c_vol . w is zero.
Vec volume_project(const Vec& w, const Vec& z, const Vec& c_vol);

}  // namespace shapeflow::models
