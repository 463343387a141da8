// shapeflow run | compare | check
#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "shapeflow/checks.hpp"
#include "shapeflow/config.hpp"
#include "shapeflow/error.hpp"
#include "shapeflow/runner.hpp"

using namespace shapeflow;

namespace {

struct Overrides {
  std::optional<std::string> tau, eps0, model, flow, mesh, out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--tau", o.tau, "time step");
  cmd->add_option("--eps0", o.eps0, "inertia weight");
  cmd->add_option("--model", o.model, "reconstruct | drag | eigen | holefill");
  cmd->add_option("--flow", o.flow, "h1 | inertial | inertial-mdr | inertial-bgn-mdr | inertial-bgn-harmonic");
  cmd->add_option("--mesh", o.mesh, "fixture name or mesh file");
  cmd->add_option("--out", o.out, "output directory");
}

config::RunConfig resolve(const std::string& path, const Overrides& o) {
  config::RunConfig c = config::load(path);
  const std::pair<const char*, const std::optional<std::string>*> keys[] = {
      {"tau", &o.tau}, {"eps0", &o.eps0}, {"model", &o.model}, {"flow", &o.flow}, {"mesh", &o.mesh}, {"out", &o.out}};
  for (const auto& [k, v] : keys)
    if (*v) config::apply(c, k, **v);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shape optimization by inertial gradient flows"};
  app.require_subcommand(1);

  std::string cfg_path;
  Overrides ov;
  CLI::App* run = app.add_subcommand("run", "run one configuration");
  run->add_option("--config", cfg_path, "key = value file")->required();
  add_overrides(run, ov);

  std::string a_path, b_path, cmp_out;
  CLI::App* cmp = app.add_subcommand("compare", "run two configurations and merge their histories");
  cmp->add_option("--a", a_path)->required();
  cmp->add_option("--b", b_path)->required();
  cmp->add_option("--out", cmp_out)->required();

  CLI::App* chk = app.add_subcommand("check", "finite-difference and analytic oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : runner::kConfigError;
  }

  try {
    if (*run) {
      const runner::RunResult r = runner::run(resolve(cfg_path, ov));
      if (r.exit_code != runner::kOk) {
        std::cerr << "shapeflow: " << r.message << "\n";
      } else {
        std::cout << "steps: " << r.steps << (r.early_stopped ? " (early stop)" : "") << "\n";
        if (!r.history.empty()) std::cout << "final J: " << r.history.back().J << "\n";
      }
      return r.exit_code;
    }
    if (*cmp) {
      const runner::CompareResult r = runner::compare(config::load(a_path), config::load(b_path), cmp_out);
      for (const auto* x : {&r.a, &r.b})
        if (x->exit_code != runner::kOk) {
          std::cerr << "shapeflow: " << x->message << "\n";
          return x->exit_code;
        }
      std::cout << "final J ratio (a / b): " << r.final_ratio << "\n";
      return runner::kOk;
    }
    if (*chk) {
      const auto rows = checks::run_checks();
      std::cout << checks::format_table(rows);
      for (const auto& r : rows)
        if (!r.pass) return runner::kNumericalFailure;
      return runner::kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "shapeflow: " << e.what() << "\n";
    return runner::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "shapeflow: " << e.what() << "\n";
    return runner::kNumericalFailure;
  }
  return runner::kOk;
}
