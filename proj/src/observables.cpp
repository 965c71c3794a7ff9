#include "qiup/observables.hpp"

#include <algorithm>
#include <exception>

namespace qiup {

CountResult counts(const BiphotonState& state, const PathId& path, Band band) {
  CountResult c;
  for (const auto& [key, amp] : state) {
    const Mode& m = key.photon(band);
    if (m.path != path) continue;
    (m.pol == Polarization::H ? c.n_h : c.n_v) += std::norm(amp);
  }
  return c;
}

CountResult counts_per_pair(const BiphotonState& state, const PathId& path, Band band) {
  const double n = norm_sq(state);
  CountResult c = counts(state, path, band);
  if (n > 0.0) {
    c.n_h /= n;
    c.n_v /= n;
  }
  return c;
}

BiphotonState conditional_state(const BiphotonState& state, const PathId& path, Band band) {
  BiphotonState::Amplitudes kept;
  for (const auto& [key, amp] : state) {
    if (key.photon(band).path == path) kept.emplace(key, amp);
  }
  return BiphotonState(std::move(kept), state.prune_epsilon());
}

std::vector<double> FringeScan::n_h() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.n_h);
  return out;
}

std::vector<double> FringeScan::n_v() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.n_v);
  return out;
}

namespace {

FringeScan prepare_scan(const CircuitPlan& plan, const std::string& sweep, std::span<const double> grid) {
  if (!plan.free_parameters().contains(sweep)) {
    throw ScanError("'" + sweep + "' is not a free parameter of the circuit");
  }
  require_bound(bind_parameters(plan, {{sweep, 0.0}}));
  for (size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw ScanError("scan grid must be strictly increasing");
  }
  FringeScan scan;
  scan.parameter = sweep;
  scan.phis.assign(grid.begin(), grid.end());
  scan.records.resize(grid.size());
  scan.detect_path = plan.detect_path;
  scan.detect_band = plan.detect_band;
  return scan;
}

CountResult evaluate(const CircuitPlan& plan, const std::string& sweep, double x, const ExecOptions& options) {
  const BiphotonState final_state = execute(bind_parameters(plan, {{sweep, x}}), options);
  return counts_per_pair(final_state, plan.detect_path, plan.detect_band);
}

}  // namespace

FringeScan fringe_scan(const CircuitPlan& plan, const std::string& sweep, std::span<const double> grid,
                       const ExecOptions& options) {
  FringeScan scan = prepare_scan(plan, sweep, grid);
  const auto n = static_cast<long>(grid.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (long k = 0; k < n; ++k) {
    try {
      scan.records[static_cast<size_t>(k)] = evaluate(plan, sweep, grid[static_cast<size_t>(k)], options);
    } catch (...) {
#pragma omp critical(qiup_scan_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return scan;
}

FringeScan fringe_scan_serial(const CircuitPlan& plan, const std::string& sweep, std::span<const double> grid,
                              const ExecOptions& options) {
  FringeScan scan = prepare_scan(plan, sweep, grid);
  for (size_t k = 0; k < grid.size(); ++k) scan.records[k] = evaluate(plan, sweep, grid[k], options);
  return scan;
}

std::vector<double> uniform_grid(double from, double to, size_t points) {
  std::vector<double> g(points);
  for (size_t k = 0; k < points; ++k) {
    g[k] = from + (to - from) * static_cast<double>(k) / static_cast<double>(points);
  }
  return g;
}

VisibilityResult visibility(std::span<const double> values, std::span<const double> grid) {
  if (values.empty()) throw std::invalid_argument("visibility of an empty list");
  if (!grid.empty() && grid.size() != values.size()) {
    throw std::invalid_argument("visibility grid and values differ in length");
  }
  size_t arg_max = 0;
  double lo = values[0];
  for (size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[arg_max]) arg_max = k;
    lo = std::min(lo, values[k]);
  }
  const double hi = values[arg_max];
  VisibilityResult r;
  r.phi_at_max = grid.empty() ? static_cast<double>(arg_max) : grid[arg_max];
  if (hi + lo == 0.0) {
    r.all_zero = true;
    return r;
  }
  r.value = (hi - lo) / (hi + lo);
  return r;
}

}  // namespace qiup
