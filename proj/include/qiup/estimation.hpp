#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qiup/observables.hpp"

namespace qiup {

class EstimationError : public std::runtime_error {
public:
  EstimationError(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

/// Integer detector counts per grid point.
struct NoisyScan {
  std::vector<double> phis;
  std::vector<std::uint64_t> counts_h;
  std::vector<std::uint64_t> counts_v;
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;
};

/// counts ~ Poisson(shots * n) per point and channel, H drawn before V.
/// Generator: std::mt19937_64 seeded with `seed`, owned by this call.
NoisyScan simulate_measurement(const FringeScan& scan, std::uint64_t shots, std::uint64_t seed);

/// Per-pair H/V rates on a phase grid, the common input of calibrate/fit.
struct FitData {
  std::vector<double> phis;
  std::vector<double> h;
  std::vector<double> v;
  /// Present when the rates came from integer counts.
  std::optional<std::uint64_t> shots;
};

FitData to_fit_data(const FringeScan& scan);
FitData to_fit_data(const NoisyScan& scan);

struct CalibrationRecord {
  double phi_at_max_v = 0.0;
  double v_max = 0.0;
  double v_min = 0.0;
  /// Extrema coincide; visibility is reported as 0.
  bool flat = false;

  double visibility() const;
};

inline constexpr size_t kMinCalibrationPoints = 16;

/// Locates the vertical-channel maximum (ties to the smallest phi).
/// E_SPARSE_SCAN below 16 points.
CalibrationRecord calibrate(const FitData& data);

enum class Weighting { Equal, InverseVariance };

struct FitOptions {
  Weighting weighting = Weighting::Equal;
  int max_iterations = 500;
  double parameter_tolerance = 1e-10;
  double beta_grid_step = 0.05;
  int gamma_grid_steps = 72;
  bool parallel = true;
};

struct FitResult {
  double beta1_hat = 0.0;
  double gamma_hat = 0.0;
  double alpha1_hat = 1.0;
  double residual_sum_sq = 0.0;
  bool converged = false;
  /// beta1_hat < 0.02: gamma has (almost) no effect on the counts.
  bool gamma_unidentifiable = false;
  int iterations = 0;
};

inline constexpr double kGammaIdentifiabilityThreshold = 0.02;

/// Least-squares fit of (beta1, gamma) to the closed-form H and V counts:
/// grid search over the box, then projected Levenberg-Marquardt.
FitResult fit(const FitData& data, const FitOptions& options = {});

/// Objective value at (beta1, gamma); exposed for tests.
double fit_objective(const FitData& data, double beta1, double gamma, Weighting weighting = Weighting::Equal);

/// sqrt(1 - beta1^2); domain error outside [0, 1].
double infer_alpha1(double beta1_hat);

/// `beta1=... gamma=... alpha1=... rss=... converged=...`
std::string summary(const FitResult& r);

/// Simulates and fits one dataset per seed (OpenMP over seeds when
/// options.parallel); results in seed order.
std::vector<FitResult> monte_carlo_fits(const FringeScan& truth, std::uint64_t shots,
                                        const std::vector<std::uint64_t>& seeds, const FitOptions& options = {});

}  // namespace qiup
