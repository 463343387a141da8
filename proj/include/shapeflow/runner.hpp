#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "shapeflow/config.hpp"
#include "shapeflow/inertial_flow.hpp"
#include "shapeflow/mesh.hpp"
#include "shapeflow/models.hpp"

namespace shapeflow::runner {

using config::RunConfig;
using linalg::Vec;

/// One history.csv row. For hole filling J holds the Willmore energy and eta
/// the largest conormal misfit in degrees.
struct HistoryRow {
  int step = 0;
  double time = 0.0;
  double J = 0.0;
  double mech_energy = 0.0;
  double eta = 0.0;
  double volume = 0.0;
  double min_angle = 0.0;
  double edge_length_ratio = 0.0;
};

/// What a 2D time step computed, handed to an observer before the mesh moves.
struct StepInfo {
  const flow::FlowState* state = nullptr;  ///< state at t_n
  const Vec* w_tilde = nullptr;            ///< inertial velocity w~^{n+1}
  const Vec* w_hat = nullptr;              ///< BGN boundary velocity, or null
  const Vec* mesh_velocity = nullptr;      ///< w^{n+1}
};

struct RunOptions {
  bool write_artifacts = true;
  std::function<void(const StepInfo&)> observer;
};

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFailure = 3 };

struct RunResult {
  int exit_code = kOk;
  std::string message;
  std::vector<HistoryRow> history;
  bool early_stopped = false;
  int steps = 0;
};

/// Named planar fixtures (disk-2842, lshape, unit-square, obstacle-channel)
/// or a mesh file path.
mesh::SimplicialMesh2D load_mesh_2d(const std::string& name);
std::unique_ptr<models::ShapeModel> make_model(const RunConfig& cfg);
flow::FlowParams flow_params(const RunConfig& cfg);
/// Edges with no fixed endpoint: the part of the boundary that is designed.
std::vector<bool> free_edges(const mesh::SimplicialMesh2D& mesh, const std::vector<bool>& fixed);

/// Validates, runs the time loop and (optionally) writes history.csv,
/// manifest.txt and mesh_XXXXXX.off into cfg.out. Errors are reported
/// through exit_code and message; nothing is thrown.
RunResult run(const RunConfig& cfg, const RunOptions& opt = {});

/// CSV text of a history, header included.
std::string history_csv(const std::vector<HistoryRow>& rows, bool holefill);

struct CompareResult {
  RunResult a, b;
  double final_ratio = 0.0;  ///< final J of a over final J of b
};
/// Runs both configs (outputs under out/a and out/b) and writes
/// out/compare.csv (merged on step) and out/summary.txt.
CompareResult compare(RunConfig a, RunConfig b, const std::filesystem::path& out);

}  // namespace shapeflow::runner
