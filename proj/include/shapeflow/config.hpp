#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace shapeflow::config {

enum class Model { kReconstruct, kDrag, kEigen, kHolefill };
enum class Flow { kH1, kInertial, kInertialMdr, kInertialBgnMdr, kInertialBgnHarmonic };

/// Flat run description. Text form is `key = value` per line, `#` comments.
struct RunConfig {
  Model model = Model::kReconstruct;
  Flow flow = Flow::kInertial;
  std::string mesh = "disk-2842";  ///< fixture name or mesh file path
  double tau = 0.02;
  double T = 8.0;
  double eps0 = 1.0;
  double c = 1.0;
  double t0 = 1.0;
  double gap_tol = 1e-2;
  double stop_tol = 1e-10;
  int snapshot_every = 50;

  std::string u_d = "recon-case1";    ///< reconstruction preset
  std::string inflow = "drag-case1";  ///< Stokes preset
  double mu = 1.0;                    ///< viscosity
  double force_x = 0.0, force_y = 0.0;
  int ell = 1;

  // hole filling
  std::string mu_out = "sphere";  ///< sphere | tilt
  double tilt_deg = 45.0;
  double rel_tol = 1e-6;          ///< stationarity of the Willmore energy
  int window = 10;

  std::string out = "out";
};

std::string to_string(Model m);
std::string to_string(Flow f);

/// Sets one key from its text value; ConfigError on unknown keys or bad values.
void apply(RunConfig& cfg, const std::string& key, const std::string& value);
RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);
/// Range and combination checks; ConfigError on the first violation.
void validate(const RunConfig& cfg);
/// Every key with its resolved value, one per line, round-trips through parse.
std::string to_text(const RunConfig& cfg);
/// Number of time steps: round(T / tau).
int num_steps(const RunConfig& cfg);

}  // namespace shapeflow::config
