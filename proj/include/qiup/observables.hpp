#pragma once

#include <span>
#include <string>
#include <vector>

#include "qiup/circuit.hpp"
#include "qiup/engine.hpp"
#include "qiup/state.hpp"

namespace qiup {

/// <N_H>, <N_V> at one path and band.
struct CountResult {
  double n_h = 0.0;
  double n_v = 0.0;
};

/// Unnormalized expectation values: sum of |amp|^2 over entries whose
/// `band` photon sits at `path` with the given polarization. Distinct tags
/// and partner modes add incoherently because they are distinct keys.
CountResult counts(const BiphotonState& state, const PathId& path, Band band);

/// Counts per emitted pair, i.e. divided by norm_sq(state).
CountResult counts_per_pair(const BiphotonState& state, const PathId& path, Band band);

/// Entries whose `band` photon is at `path`; amplitudes are not renormalized.
BiphotonState conditional_state(const BiphotonState& state, const PathId& path, Band band);

/// Per-pair counts at the plan's detector as one parameter is swept.
struct FringeScan {
  std::string parameter = "phi";
  std::vector<double> phis;  // grid values of `parameter`
  std::vector<CountResult> records;
  PathId detect_path;
  Band detect_band = Band::Signal;

  std::vector<double> n_h() const;
  std::vector<double> n_v() const;
};

class ScanError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Evaluates the plan at every grid point (OpenMP over points); records are
/// assembled in grid order. `sweep` must be a free parameter of `plan` and
/// the only one left unbound.
FringeScan fringe_scan(const CircuitPlan& plan, const std::string& sweep, std::span<const double> grid,
                       const ExecOptions& options = {});

/// Single-threaded reference for fringe_scan.
FringeScan fringe_scan_serial(const CircuitPlan& plan, const std::string& sweep, std::span<const double> grid,
                              const ExecOptions& options = {});

/// `points` uniform samples of [from, to), endpoint excluded.
std::vector<double> uniform_grid(double from, double to, size_t points);

struct VisibilityResult {
  double value = 0.0;
  double phi_at_max = 0.0;
  /// max + min == 0; value is reported as 0.
  bool all_zero = false;
};

/// (max - min)/(max + min). phi_at_max is the grid point of the first
/// maximum (or its index when `grid` is empty).
VisibilityResult visibility(std::span<const double> values, std::span<const double> grid = {});

}  // namespace qiup
