#pragma once

#include <string>
#include <vector>

namespace shapeflow::checks {

struct CheckRow {
  std::string name;
  double value = 0.0;
  std::string bound;  ///< e.g. "<= 1e-08" or "in [0.8, 1.2]"
  bool pass = false;
};

/// Finite-difference and analytic oracles over all modules, a few seconds in total.
std::vector<CheckRow> run_checks();
/// Fixed-width table, one row per check, and a final count line.
std::string format_table(const std::vector<CheckRow>& rows);

}  // namespace shapeflow::checks
