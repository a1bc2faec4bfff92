#pragma once

#include <string>
#include <vector>

#include "sweep.hpp"

namespace vibrosheet {

// Experimental velocity grid, recorded in cm/s (the reporting unit); same
// axes and ordering conventions as the sweep result CSV minus the power
// columns.
struct ExperimentCell {
  double freq_hz;
  double phase_deg;
  double duty_left;
  double duty_right;
  double velocity_cms;
};

struct ExperimentGrid {
  std::vector<ExperimentCell> cells;
  std::string provenance;
};

// CSV header: freq_hz,phase_deg,duty_left,duty_right,velocity_cms
// Duplicate (f, phase, duty_L, duty_R) rows raise AxisMismatch; malformed
// rows raise ParseError with the line number.
ExperimentGrid load_experiment(const std::string& path);

struct ErrorMapCell {
  double freq_hz;
  double phase_deg;
  double rmse_cms;
  double pcc;  // NaN when undefined (degenerate series)
  int n_cells;
  int n_excluded;
};

// Per-(frequency, phase) RMSE and PCC over the duty_L x duty_R velocity
// vectors, simulation converted to cm/s. Cells missing or failed on either
// side are excluded pairwise.
std::vector<ErrorMapCell> error_maps(const SweepResult& sim,
                                     const ExperimentGrid& exp);

struct HistBin {
  double lo;
  double hi;
  int count;
};

// Left-closed bins of the given width anchored at 0; non-finite inputs are
// dropped, counts sum to the number of finite inputs.
std::vector<HistBin> histogram(const std::vector<double>& values,
                               double bin_width);

std::string error_map_csv(const std::vector<ErrorMapCell>& cells);
std::string histogram_csv(const std::vector<HistBin>& bins);

}  // namespace vibrosheet
