#include <doctest.h>

#include <set>

#include "qiup/engine.hpp"
#include "qiup/observables.hpp"
#include "test_support.hpp"

using namespace qiup;
using namespace qiup::testing;

namespace {

const SourceTag T1 = SourceTag::tagged(1);
const SourceTag M = SourceTag::merged();
const double kInvTwoSqrt2 = 1.0 / (2.0 * std::sqrt(2.0));
const Complex I{0.0, 1.0};

// With beta2 = 1 and theta = 45 deg, hand evolution of the two crystal terms
// through the interferometer gives, per emitted pair at o' (signal):
//   H: 1/16 (only the NLC2 signal rotated by the HWP reaches o' horizontal)
//   V: (5 + 4 beta1 cos(gamma - phi))/16
double nh_derived(double, double, double) { return 1.0 / 16.0; }
double nv_derived(double b, double g, double p) { return (5.0 + 4.0 * b * std::cos(g - p)) / 16.0; }

CountResult run_fig1(double beta1, double gamma, double phi, const ExecOptions& opt = {}) {
  const CircuitPlan plan = fig1_preset(fig1_regime_params(beta1, gamma, phi));
  return counts_per_pair(execute(plan, opt), plan.detect_path, plan.detect_band);
}

CircuitPlan phi_free(double beta1, double gamma) {
  ParamMap p = fig1_regime_params(beta1, gamma, 0.0);
  p.erase("phi");
  return bind_parameters(fig1_template(), p);
}

ParamMap general_params(double a1, double b1, double a2, double b2, double g, double phi, double theta) {
  return {{"alpha1", a1}, {"beta1", b1}, {"alpha2", a2}, {"beta2", b2},
          {"gamma", g},   {"phi", phi},  {"theta", theta}};
}

}  // namespace

TEST_CASE("per-pair counts at the detector") {
  SUBCASE("fully coherent constructive point") {
    const auto c = run_fig1(1.0, 0.0, 0.0);
    CHECK(c.n_v == doctest::Approx(9.0 / 16.0).epsilon(1e-14));
    CHECK(c.n_h == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
  }
  SUBCASE("destructive point") {
    const auto c = run_fig1(1.0, 0.0, kPi);
    CHECK(c.n_v == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    CHECK(c.n_h == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
  }
  SUBCASE("no vertical idler from the first crystal") {
    const auto c = run_fig1(0.0, 0.0, 0.0);
    CHECK(c.n_v == doctest::Approx(5.0 / 16.0).epsilon(1e-14));
  }
  SUBCASE("unnormalized counts are twice the per-pair values") {
    const CircuitPlan plan = fig1_preset(fig1_regime_params(1.0, 0.0, 0.0));
    const auto c = counts(execute(plan), plan.detect_path, plan.detect_band);
    CHECK(c.n_v == doctest::Approx(9.0 / 8.0));
    CHECK(c.n_h == doctest::Approx(1.0 / 8.0));
  }
}

TEST_CASE("engine matches the hand-derived counts over a grid") {
  double worst = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double b = 0.1 * i;
    for (int j = 0; j < 8; ++j) {
      const double g = kPi / 4 * j;
      for (double p : uniform_grid(0.0, 2 * kPi, 16)) {
        const auto c = run_fig1(b, g, p);
        worst = std::max({worst, std::abs(c.n_h - nh_derived(b, g, p)), std::abs(c.n_v - nv_derived(b, g, p))});
      }
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("65-point fringe at gamma = 0") {
  for (double b : {0.0, 0.3, 1.0}) {
    const auto grid = uniform_grid(0.0, 2 * kPi, 65);
    const auto scan = fringe_scan(phi_free(b, 0.0), "phi", grid);
    REQUIRE(scan.records.size() == 65);
    for (size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(scan.records[k].n_v - (5.0 + 4.0 * b * std::cos(grid[k])) / 16.0) < 1e-12);
    }
  }
}

TEST_CASE("conditional state at o'") {
  const CircuitPlan plan = fig1_preset(fig1_regime_params(0.6, 0.4, 1.1));
  const auto fin = execute(plan);
  const auto cond = conditional_state(fin, "o'", Band::Signal);
  CHECK(cond.size() > 0);
  CHECK(cond.size() <= 16);
  for (const auto& [k, v] : cond) CHECK(k.signal().path == PathId("o'"));
  CHECK(conditional_state(fin, "nowhere", Band::Signal).size() == 0);
}

TEST_CASE("tagged-term amplitude with alpha1 = alpha2 = 1") {
  // NLC1 pair H/H, NLC2 pair V/V at r. The H signal at o' carrying a V
  // tagged idler at f' picks up: HWP on the idler (-sin 2theta = -1),
  // BS r->f (i/sqrt2), bs2 f->f' (1/sqrt2), bs2 b->o' (i/sqrt2):
  //   1 * (i/sqrt2)(-1)(1/sqrt2)(i/sqrt2) = 1/(2 sqrt2).
  const auto fin = execute(fig1_preset(general_params(1.0, 0.0, 1.0, 0.0, 0.0, 0.0, kPi / 4)));
  const Complex a = fin.amplitude(pair_at("o'", Polarization::H, T1, "f'", Polarization::V, T1));
  CHECK(std::abs(a - kInvTwoSqrt2) < 1e-12);
}

TEST_CASE("tagged-term amplitudes at theta = 45 deg, general preparation") {
  const double a1 = 0.6, b1 = 0.8, a2 = 0.28, b2 = 0.96;
  const auto fin = execute(fig1_preset(general_params(a1, b1, a2, b2, 0.7, 1.3, kPi / 4)));
  auto amp = [&](Polarization spol, SourceTag stag, const char* ipath, Polarization ipol) {
    return fin.amplitude(pair_at("o'", spol, stag, ipath, ipol, T1));
  };
  // H signal: stays tagged
  CHECK(std::abs(amp(Polarization::H, T1, "f'", Polarization::H) + a1 * a2 * kInvTwoSqrt2) < 1e-12);
  CHECK(std::abs(amp(Polarization::H, T1, "f'", Polarization::V) - a1 * a2 * kInvTwoSqrt2) < 1e-12);
  CHECK(std::abs(amp(Polarization::H, T1, "e'", Polarization::H) - I * a1 * a2 * kInvTwoSqrt2) < 1e-12);
  CHECK(std::abs(amp(Polarization::H, T1, "e'", Polarization::V) - I * a1 * a2 * kInvTwoSqrt2) < 1e-12);
  // V signal: merged
  CHECK(std::abs(amp(Polarization::V, M, "f'", Polarization::H) + a1 * b2 * kInvTwoSqrt2) < 1e-12);
  CHECK(std::abs(amp(Polarization::V, M, "f'", Polarization::V) - a1 * b2 * kInvTwoSqrt2) < 1e-12);
  CHECK(std::abs(amp(Polarization::V, M, "e'", Polarization::V) - I * a1 * b2 * kInvTwoSqrt2) < 1e-12);
}

TEST_CASE("parallel scan equals the serial reference") {
  const auto plan = phi_free(0.7, 1.2);
  const auto grid = uniform_grid(0.0, 2 * kPi, 200);
  const auto par = fringe_scan(plan, "phi", grid);
  const auto ser = fringe_scan_serial(plan, "phi", grid);
  REQUIRE(par.records.size() == ser.records.size());
  for (size_t k = 0; k < grid.size(); ++k) {
    CHECK(par.records[k].n_h == ser.records[k].n_h);
    CHECK(par.records[k].n_v == ser.records[k].n_v);
  }
  CHECK(par.detect_path == PathId("o'"));
}

TEST_CASE("scan argument checks") {
  const auto plan = phi_free(0.7, 1.2);
  const std::vector<double> grid{0.0, 1.0};
  CHECK_THROWS_AS(fringe_scan(plan, "delta", grid), ScanError);
  const std::vector<double> bad{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(fringe_scan(plan, "phi", bad), ScanError);
  CHECK_THROWS_AS(fringe_scan(fig1_template(), "phi", grid), PlanError);
  CHECK(fringe_scan(plan, "phi", std::vector<double>{}).records.empty());
}

TEST_CASE("theta sweep") {
  ParamMap p = fig1_regime_params(0.5, 0.0, 0.0);
  p.erase("theta");
  const auto plan = bind_parameters(fig1_template(), p);
  const auto grid = uniform_grid(0.0, kPi, 32);
  const auto scan = fringe_scan(plan, "theta", grid);
  CHECK(scan.parameter == "theta");
  // theta = 0: the HWP leaves the vertical NLC2 idler/signal vertical, so
  // nothing reaches o' horizontally
  CHECK(scan.records[0].n_h == doctest::Approx(0.0));
  for (const auto& r : scan.records) CHECK(r.n_h + r.n_v <= 1.0);
}

TEST_CASE("visibility") {
  const auto grid = uniform_grid(0.0, 2 * kPi, 256);
  std::vector<double> v;
  for (double p : grid) v.push_back((5.0 + 4.0 * std::cos(p)) / 16.0);
  auto r = visibility(v, grid);
  CHECK(r.value == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.phi_at_max == 0.0);

  v.clear();
  for (double p : grid) v.push_back((5.0 + 2.0 * std::cos(p - 1.0)) / 16.0);
  r = visibility(v, grid);
  CHECK(r.value == doctest::Approx(0.4).epsilon(1e-4));
  CHECK(r.phi_at_max == doctest::Approx(1.0).epsilon(0.03));

  const std::vector<double> flat(10, 0.3);
  r = visibility(flat);
  CHECK(r.value == 0.0);
  CHECK(r.phi_at_max == 0.0);
  CHECK_FALSE(r.all_zero);

  const std::vector<double> zero(5, 0.0);
  r = visibility(zero);
  CHECK(r.all_zero);
  CHECK(r.value == 0.0);

  CHECK_THROWS(visibility(std::vector<double>{}));
}

TEST_CASE("completeness over the signal output paths") {
  for (double b : {0.0, 0.4, 1.0}) {
    const auto fin = execute(fig1_preset(fig1_regime_params(b, 0.9, 2.0)));
    std::set<PathId> paths;
    for (const auto& [k, v] : fin) paths.insert(k.signal().path);
    CHECK(paths == std::set<PathId>{"b'", "e'", "o'"});
    double total = 0.0;
    for (const auto& p : paths) {
      const auto c = counts(fin, p, Band::Signal);
      total += c.n_h + c.n_v;
    }
    CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(norm_sq(fin) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("a phase on the tagged H amplitude changes no count") {
  for (double chi : {0.1, 1.0, 2.5}) {
    for (double p : {0.0, 1.0, 4.0}) {
      CircuitPlan plan = fig1_preset(fig1_regime_params(0.5, 0.8, p));
      const auto base = counts(execute(plan), plan.detect_path, plan.detect_band);
      std::get<step::Prepare>(plan.pipeline[1]).alpha_phase = Scalar::of(chi);
      const auto shifted = counts(execute(plan), plan.detect_path, plan.detect_band);
      CHECK(std::abs(base.n_h - shifted.n_h) < 1e-12);
      CHECK(std::abs(base.n_v - shifted.n_v) < 1e-12);
    }
  }
}

TEST_CASE("without merging the vertical fringe is flat") {
  ExecOptions opt;
  opt.merge = false;
  const auto grid = uniform_grid(0.0, 2 * kPi, 64);
  const auto scan = fringe_scan(phi_free(1.0, 0.0), "phi", grid, opt);
  CHECK(visibility(scan.n_v(), grid).value < 1e-12);
  const auto merged = fringe_scan(phi_free(1.0, 0.0), "phi", grid);
  CHECK(visibility(merged.n_v(), grid).value == doctest::Approx(0.8));
}

TEST_CASE("hadamard convention keeps the norm") {
  ExecOptions opt;
  opt.bs_convention = BsConvention::Hadamard;
  const auto fin = execute(fig1_preset(fig1_regime_params(0.6, 0.2, 0.4)), opt);
  CHECK(norm_sq(fin) == doctest::Approx(2.0).epsilon(1e-12));
}
