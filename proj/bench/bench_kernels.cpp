// Serial vs OpenMP timings for the data-parallel kernels.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "qiup/circuit.hpp"
#include "qiup/estimation.hpp"
#include "qiup/observables.hpp"

using namespace qiup;

template <typename F>
double seconds(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());

  ParamMap p = fig1_regime_params(0.8, 0.5, 0.0);
  p.erase("phi");
  const CircuitPlan plan = bind_parameters(fig1_template(), p);
  const auto grid = uniform_grid(0.0, 2.0 * std::numbers::pi, 1024);

  const double t_serial = seconds([&] { fringe_scan_serial(plan, "phi", grid); }, 5);
  const double t_par = seconds([&] { fringe_scan(plan, "phi", grid); }, 5);
  std::printf("fringe_scan 1024 pts   serial %8.4f s   omp %8.4f s   speedup %.2fx\n", t_serial, t_par,
              t_serial / t_par);

  const FringeScan truth = fringe_scan(plan, "phi", uniform_grid(0.0, 2.0 * std::numbers::pi, 64));
  const FitData data = to_fit_data(truth);
  FitOptions serial_opts;
  serial_opts.parallel = false;
  const double f_serial = seconds([&] { fit(data, serial_opts); }, 20);
  const double f_par = seconds([&] { fit(data); }, 20);
  std::printf("fit (grid + refine)    serial %8.4f s   omp %8.4f s   speedup %.2fx\n", f_serial, f_par,
              f_serial / f_par);

  std::vector<std::uint64_t> seeds(100);
  std::iota(seeds.begin(), seeds.end(), 1);
  const double m_serial = seconds([&] { monte_carlo_fits(truth, 100000, seeds, serial_opts); }, 1);
  const double m_par = seconds([&] { monte_carlo_fits(truth, 100000, seeds); }, 1);
  std::printf("monte carlo 100 fits   serial %8.4f s   omp %8.4f s   speedup %.2fx\n", m_serial, m_par,
              m_serial / m_par);
  return 0;
}
