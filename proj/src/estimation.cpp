#include "qiup/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <sstream>

#include "qiup/format.hpp"
#include "qiup/reference_model.hpp"

namespace qiup {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t poisson(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

void check_data(const FitData& d) {
  if (d.phis.empty()) throw EstimationError("E_EMPTY_DATA", "no data points");
  if (d.h.size() != d.phis.size() || d.v.size() != d.phis.size()) {
    throw EstimationError("E_BAD_DATA", "column lengths differ");
  }
  for (size_t k = 0; k < d.phis.size(); ++k) {
    if (!std::isfinite(d.phis[k]) || !std::isfinite(d.h[k]) || !std::isfinite(d.v[k])) {
      throw EstimationError("E_NON_FINITE", "non-finite value at point " + std::to_string(k));
    }
  }
}

std::vector<double> weights(const FitData& d, Weighting w, bool horizontal) {
  std::vector<double> out(d.phis.size(), 1.0);
  if (w == Weighting::Equal || !d.shots) return out;
  const double shots = static_cast<double>(*d.shots);
  const auto& rates = horizontal ? d.h : d.v;
  for (size_t k = 0; k < out.size(); ++k) {
    out[k] = shots / std::max(std::round(rates[k] * shots), 1.0);
  }
  return out;
}

struct Problem {
  const FitData& data;
  std::vector<double> wh;
  std::vector<double> wv;

  double objective(double b, double g) const {
    double total = 0.0;
    for (size_t k = 0; k < data.phis.size(); ++k) {
      const double rh = reference::nh_closed(b, g, data.phis[k]) - data.h[k];
      const double rv = reference::nv_closed(b, g, data.phis[k]) - data.v[k];
      total += wh[k] * rh * rh + wv[k] * rv * rv;
    }
    return total;
  }

  /// Gauss-Newton normal equations J^T W J and gradient J^T W r.
  void normal_equations(double b, double g, std::array<double, 3>& jtj, std::array<double, 2>& jtr) const {
    jtj = {0.0, 0.0, 0.0};
    jtr = {0.0, 0.0};
    for (size_t k = 0; k < data.phis.size(); ++k) {
      const double p = data.phis[k];
      const double d = g - p;
      const double sd = std::sin(d), cd = std::cos(d), cp = std::cos(p);
      const double rh = reference::nh_closed(b, g, p) - data.h[k];
      const double rv = reference::nv_closed(b, g, p) - data.v[k];
      const double hb = (-6.0 * b + sd - cd - 2.0 * cp) / 16.0;
      const double hg = b * (cd + sd) / 16.0;
      const double vb = 2.0 * (cd + cp) / 16.0;
      const double vg = -2.0 * b * sd / 16.0;
      jtj[0] += wh[k] * hb * hb + wv[k] * vb * vb;
      jtj[1] += wh[k] * hb * hg + wv[k] * vb * vg;
      jtj[2] += wh[k] * hg * hg + wv[k] * vg * vg;
      jtr[0] += wh[k] * hb * rh + wv[k] * vb * rv;
      jtr[1] += wh[k] * hg * rh + wv[k] * vg * rv;
    }
  }
};

struct GridBest {
  double beta = 0.0;
  double gamma = 0.0;
};

GridBest grid_search(const Problem& prob, const FitOptions& opt) {
  const int nb = static_cast<int>(std::lround(1.0 / opt.beta_grid_step)) + 1;
  const int ng = opt.gamma_grid_steps;
  std::vector<double> values(static_cast<size_t>(nb * ng));
  auto beta_at = [&](int i) { return std::min(1.0, i * opt.beta_grid_step); };
  auto gamma_at = [&](int j) { return kTwoPi * j / ng; };
  const long cells = static_cast<long>(nb) * ng;
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) if (opt.parallel)
  for (long c = 0; c < cells; ++c) {
    try {
      const int i = static_cast<int>(c / ng), j = static_cast<int>(c % ng);
      values[static_cast<size_t>(c)] = prob.objective(beta_at(i), gamma_at(j));
    } catch (...) {
#pragma omp critical(qiup_grid_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  // first minimum in (beta, gamma) row-major order
  const auto best = static_cast<long>(std::min_element(values.begin(), values.end()) - values.begin());
  return {beta_at(static_cast<int>(best / ng)), gamma_at(static_cast<int>(best % ng))};
}

}  // namespace

NoisyScan simulate_measurement(const FringeScan& scan, std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw EstimationError("E_SHOTS", "shots must be at least 1");
  std::mt19937_64 rng(seed);
  NoisyScan out;
  out.phis = scan.phis;
  out.shots = shots;
  out.seed = seed;
  const double n = static_cast<double>(shots);
  for (const auto& rec : scan.records) {
    out.counts_h.push_back(poisson(rng, n * rec.n_h));
    out.counts_v.push_back(poisson(rng, n * rec.n_v));
  }
  return out;
}

FitData to_fit_data(const FringeScan& scan) { return {scan.phis, scan.n_h(), scan.n_v(), std::nullopt}; }

FitData to_fit_data(const NoisyScan& scan) {
  FitData d;
  d.phis = scan.phis;
  d.shots = scan.shots;
  const double n = static_cast<double>(scan.shots);
  for (auto c : scan.counts_h) d.h.push_back(static_cast<double>(c) / n);
  for (auto c : scan.counts_v) d.v.push_back(static_cast<double>(c) / n);
  return d;
}

double CalibrationRecord::visibility() const {
  if (flat || v_max + v_min == 0.0) return 0.0;
  return (v_max - v_min) / (v_max + v_min);
}

CalibrationRecord calibrate(const FitData& data) {
  check_data(data);
  if (data.phis.size() < kMinCalibrationPoints) {
    throw EstimationError("E_SPARSE_SCAN", "calibration needs at least " + std::to_string(kMinCalibrationPoints) +
                                               " points, got " + std::to_string(data.phis.size()));
  }
  const VisibilityResult vis = visibility(data.v, data.phis);
  CalibrationRecord rec;
  rec.phi_at_max_v = vis.phi_at_max;
  rec.v_max = *std::max_element(data.v.begin(), data.v.end());
  rec.v_min = *std::min_element(data.v.begin(), data.v.end());
  rec.flat = rec.v_max - rec.v_min <= 1e-12 * std::max(rec.v_max, 1.0);
  return rec;
}

double fit_objective(const FitData& data, double beta1, double gamma, Weighting weighting) {
  check_data(data);
  const Problem prob{data, weights(data, weighting, true), weights(data, weighting, false)};
  return prob.objective(beta1, gamma);
}

FitResult fit(const FitData& data, const FitOptions& opt) {
  check_data(data);
  const Problem prob{data, weights(data, opt.weighting, true), weights(data, opt.weighting, false)};
  const GridBest start = grid_search(prob, opt);

  double b = start.beta, g = start.gamma;
  double f = prob.objective(b, g);
  double lambda = 1e-3 * std::max(f, 1e-12);
  FitResult r;
  bool converged = false;
  int it = 0;
  for (; it < opt.max_iterations && !converged; ++it) {
    std::array<double, 3> a;
    std::array<double, 2> grad;
    prob.normal_equations(b, g, a, grad);
    bool accepted = false;
    while (!accepted) {
      // Levenberg damping on the identity keeps the system solvable when the
      // gamma column vanishes (beta1 = 0).
      const double a00 = a[0] + lambda, a11 = a[2] + lambda, a01 = a[1];
      const double det = a00 * a11 - a01 * a01;
      const double db = -(a11 * grad[0] - a01 * grad[1]) / det;
      const double dg = -(a00 * grad[1] - a01 * grad[0]) / det;
      const double nb = std::clamp(b + db, 0.0, 1.0);
      const double ng = g + dg;
      const double step = std::max(std::abs(nb - b), std::abs(ng - g));
      const double nf = prob.objective(nb, ng);
      if (nf <= f) {
        accepted = true;
        b = nb;
        g = ng;
        f = nf;
        lambda = std::max(lambda * 0.1, 1e-300);
        if (step < opt.parameter_tolerance) converged = true;
      } else {
        lambda *= 10.0;
        if (step < opt.parameter_tolerance || lambda > 1e300) {
          // no descent direction left at parameter resolution
          converged = true;
          break;
        }
      }
    }
  }
  r.beta1_hat = b;
  r.gamma_hat = reduce_angle(g, kTwoPi);
  r.alpha1_hat = infer_alpha1(b);
  r.residual_sum_sq = f;
  r.converged = converged;
  r.iterations = it;
  r.gamma_unidentifiable = b < kGammaIdentifiabilityThreshold;
  return r;
}

double infer_alpha1(double beta1_hat) {
  if (!(beta1_hat >= 0.0 && beta1_hat <= 1.0)) {
    throw std::domain_error("beta1 estimate must lie in [0, 1]");
  }
  return std::sqrt(1.0 - beta1_hat * beta1_hat);
}

std::string summary(const FitResult& r) {
  std::ostringstream out;
  out << "beta1=" << format_g17(r.beta1_hat) << " gamma=" << format_g17(r.gamma_hat)
      << " alpha1=" << format_g17(r.alpha1_hat) << " rss=" << format_g17(r.residual_sum_sq)
      << " converged=" << (r.converged ? "true" : "false");
  if (r.gamma_unidentifiable) out << " gamma_unidentifiable";
  return out.str();
}

std::vector<FitResult> monte_carlo_fits(const FringeScan& truth, std::uint64_t shots,
                                        const std::vector<std::uint64_t>& seeds, const FitOptions& options) {
  std::vector<FitResult> out(seeds.size());
  FitOptions inner = options;
  inner.parallel = false;
  const auto n = static_cast<long>(seeds.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (long k = 0; k < n; ++k) {
    try {
      const auto idx = static_cast<size_t>(k);
      out[idx] = fit(to_fit_data(simulate_measurement(truth, shots, seeds[idx])), inner);
    } catch (...) {
#pragma omp critical(qiup_mc_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace qiup
