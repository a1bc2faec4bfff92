#include "compare.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "error.hpp"
#include "metrics.hpp"
#include "numfmt.hpp"

namespace vibrosheet {

namespace {
constexpr const char* kExperimentHeader =
    "freq_hz,phase_deg,duty_left,duty_right,velocity_cms";

using CellKey = std::array<double, 2>;   // (duty_left, duty_right)
using GroupKey = std::array<double, 2>;  // (freq, phase)
}  // namespace

ExperimentGrid load_experiment(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  ExperimentGrid grid;
  grid.provenance = path;
  std::map<std::array<double, 4>, int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kExperimentHeader)
        fail(ErrorCode::ParseError,
             "line 1: expected header '" + std::string(kExperimentHeader) + "'");
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 5)
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line_no) + ": expected 5 fields");
    ExperimentCell c;
    c.freq_hz = parse_double(f[0], line_no);
    c.phase_deg = parse_double(f[1], line_no);
    c.duty_left = parse_double(f[2], line_no);
    c.duty_right = parse_double(f[3], line_no);
    c.velocity_cms = parse_double(f[4], line_no);
    std::array<double, 4> key{c.freq_hz, c.phase_deg, c.duty_left, c.duty_right};
    auto [it, inserted] = seen.emplace(key, line_no);
    if (!inserted)
      fail(ErrorCode::AxisMismatch,
           "line " + std::to_string(line_no) + ": duplicate cell (also line " +
               std::to_string(it->second) + ")");
    grid.cells.push_back(c);
  }
  if (grid.cells.empty())
    fail(ErrorCode::ParseError, "experiment file has no data rows");
  return grid;
}

std::vector<ErrorMapCell> error_maps(const SweepResult& sim,
                                     const ExperimentGrid& exp) {
  // Group both sides by (f, phase); keys in sim record order.
  std::vector<GroupKey> order;
  std::map<GroupKey, std::map<CellKey, const SweepRecord*>> sim_groups;
  for (const auto& r : sim.records) {
    GroupKey g{r.pattern.frequency, r.pattern.phase_deg};
    if (!sim_groups.count(g)) order.push_back(g);
    auto& cells = sim_groups[g];
    CellKey k{r.pattern.duty_left, r.pattern.duty_right};
    if (cells.count(k))
      fail(ErrorCode::GridMismatch,
           "simulation grid has duplicate duty cells; compare one battery "
           "position at a time");
    cells[k] = &r;
  }
  std::map<GroupKey, std::map<CellKey, double>> exp_groups;
  for (const auto& c : exp.cells)
    exp_groups[{c.freq_hz, c.phase_deg}][{c.duty_left, c.duty_right}] =
        c.velocity_cms;

  std::vector<ErrorMapCell> out;
  for (const auto& g : order) {
    auto it = exp_groups.find(g);
    if (it == exp_groups.end())
      fail(ErrorCode::GridMismatch,
           "experiment is missing frequency-phase group f=" +
               format_num(g[0]) + ", phase=" + format_num(g[1]));
    const auto& sim_cells = sim_groups[g];
    const auto& exp_cells = it->second;
    if (sim_cells.size() != exp_cells.size())
      fail(ErrorCode::GridMismatch,
           "duty grids differ at f=" + format_num(g[0]) + ", phase=" +
               format_num(g[1]));
    std::vector<double> xs, ys;
    int excluded = 0;
    for (const auto& [key, rec] : sim_cells) {
      auto ec = exp_cells.find(key);
      if (ec == exp_cells.end())
        fail(ErrorCode::GridMismatch,
             "duty cell missing from experiment at f=" + format_num(g[0]));
      double sim_cms = rec->velocity_mps * 100.0;
      if (rec->failed || !std::isfinite(sim_cms) ||
          !std::isfinite(ec->second)) {
        ++excluded;
        continue;
      }
      xs.push_back(sim_cms);
      ys.push_back(ec->second);
    }
    ErrorMapCell cell;
    cell.freq_hz = g[0];
    cell.phase_deg = g[1];
    cell.n_cells = static_cast<int>(xs.size());
    cell.n_excluded = excluded;
    cell.rmse_cms = xs.empty() ? std::nan("") : rmse(xs, ys);
    try {
      cell.pcc = xs.size() >= 2 ? pcc(xs, ys) : std::nan("");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateSeries) throw;
      cell.pcc = std::nan("");
    }
    out.push_back(cell);
  }
  return out;
}

std::vector<HistBin> histogram(const std::vector<double>& values,
                               double bin_width) {
  if (!(bin_width > 0.0))
    fail(ErrorCode::InvalidRange, "histogram bin width must be > 0");
  std::map<long, int> counts;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    counts[static_cast<long>(std::floor(v / bin_width))]++;
  }
  std::vector<HistBin> bins;
  for (const auto& [k, n] : counts)
    bins.push_back({k * bin_width, (k + 1) * bin_width, n});
  return bins;
}

std::string error_map_csv(const std::vector<ErrorMapCell>& cells) {
  std::string out = "freq_hz,phase_deg,rmse_cms,pcc,n_cells,n_excluded\n";
  for (const auto& c : cells) {
    out += format_num(c.freq_hz);
    out += ',' + format_num(c.phase_deg);
    out += ',' + format_num(c.rmse_cms);
    out += ',' + format_num(c.pcc);
    out += ',' + std::to_string(c.n_cells);
    out += ',' + std::to_string(c.n_excluded);
    out += '\n';
  }
  return out;
}

std::string histogram_csv(const std::vector<HistBin>& bins) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (const auto& b : bins) {
    out += format_num(b.lo);
    out += ',' + format_num(b.hi);
    out += ',' + std::to_string(b.count);
    out += '\n';
  }
  return out;
}

}  // namespace vibrosheet
