#include "qiup/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "qiup/circuit.hpp"
#include "qiup/data_io.hpp"
#include "qiup/engine.hpp"
#include "qiup/estimation.hpp"
#include "qiup/format.hpp"
#include "qiup/observables.hpp"
#include "qiup/reference_model.hpp"

namespace qiup::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;
constexpr double kVerifyTolerance = 1e-9;

struct CommonFlags {
  std::string circuit;
  std::string preset;
  std::vector<std::string> params;
  bool no_merge = false;
  std::string bs_convention = "symmetric";
  std::string out;
  std::string format = "pretty";
};

/// Exit-code carrying failure raised inside subcommands.
struct Failure {
  int code;
  std::string message;
};

void add_circuit_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("circuit", f.circuit, "Circuit description file (.qiup)");
  cmd->add_option("--preset", f.preset, "Built-in circuit instead of a file")->check(CLI::IsMember({"fig1"}));
  cmd->add_option("--param", f.params, "Bind a free parameter, name=value (radians); repeatable");
  cmd->add_flag("--no-merge", f.no_merge, "Skip indistinguishability merge steps");
  cmd->add_option("--bs-convention", f.bs_convention, "Two-input beamsplitter matrix")
      ->check(CLI::IsMember({"symmetric", "hadamard"}))
      ->capture_default_str();
  cmd->add_option("--out", f.out, "Write tables to this file instead of standard output");
}

ExecOptions exec_options(const CommonFlags& f) {
  ExecOptions o;
  o.merge = !f.no_merge;
  o.bs_convention = f.bs_convention == "hadamard" ? BsConvention::Hadamard : BsConvention::Symmetric;
  return o;
}

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure{kValidationFailure, "bad --param '" + item + "'"};
    const std::string value = item.substr(eq + 1);
    try {
      size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      out[item.substr(0, eq)] = v;
    } catch (const std::exception&) {
      throw Failure{kValidationFailure, "bad value in --param '" + item + "'"};
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kIoFailure, "cannot read '" + path + "'"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CircuitPlan load_plan(const CommonFlags& f, std::ostream& err) {
  if (!f.preset.empty() && !f.circuit.empty()) {
    throw Failure{kValidationFailure, "give either a circuit file or --preset, not both"};
  }
  if (f.preset == "fig1") return fig1_template();
  if (f.circuit.empty()) throw Failure{kValidationFailure, "no circuit given (file or --preset fig1)"};
  const std::string text = read_file(f.circuit);
  ValidateResult v = compile(text);
  for (const auto& d : v.diagnostics) err << f.circuit << ':' << to_string(d) << '\n';
  if (!v.plan) throw Failure{kValidationFailure, "circuit has errors"};
  return *v.plan;
}

/// Runs `body` with standard output or the --out file as the table sink.
template <typename F>
void with_output(const std::string& path, std::ostream& out, F&& body) {
  if (path.empty()) {
    body(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Failure{kIoFailure, "cannot write '" + path + "'"};
  body(file);
  if (!file) throw Failure{kIoFailure, "write to '" + path + "' failed"};
}

int cmd_check(const std::string& path, std::ostream& out) {
  const std::string text = read_file(path);
  ValidateResult v = compile(text);
  size_t errors = 0, warnings = 0;
  for (const auto& d : v.diagnostics) {
    out << path << ':' << to_string(d) << '\n';
    (d.severity == Severity::Error ? errors : warnings)++;
  }
  out << errors << " error" << (errors == 1 ? "" : "s") << ", " << warnings << " warning"
      << (warnings == 1 ? "" : "s") << '\n';
  return errors == 0 ? kSuccess : kValidationFailure;
}

int cmd_run(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  CircuitPlan plan = bind_parameters(load_plan(f, err), parse_params(f.params));
  require_bound(plan);
  Warnings warnings;
  const BiphotonState final_state = execute(plan, exec_options(f), nullptr, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  const CountResult c = counts_per_pair(final_state, plan.detect_path, plan.detect_band);
  with_output(f.out, out, [&](std::ostream& sink) {
    if (f.format == "csv") {
      sink << "n_h,n_v\n" << format_g17(c.n_h) << ',' << format_g17(c.n_v) << '\n';
    } else {
      sink << "n_h=" << format_fixed(c.n_h) << " n_v=" << format_fixed(c.n_v) << '\n';
    }
  });
  return kSuccess;
}

struct ScanFlags {
  std::string sweep = "phi";
  double from = 0.0;
  double to = 2.0 * std::numbers::pi;
  size_t points = 64;
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QIUP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Failure{kValidationFailure, std::string("QIUP_SEED is not an integer: ") + env};
    }
  }
  return kDefaultSeed;
}

int cmd_scan(const CommonFlags& f, const ScanFlags& s, std::ostream& out, std::ostream& err) {
  if (s.points < 2) throw Failure{kValidationFailure, "--points must be at least 2"};
  if (!(s.to > s.from)) throw Failure{kValidationFailure, "--to must exceed --from"};
  const CircuitPlan plan = bind_parameters(load_plan(f, err), parse_params(f.params));
  const auto grid = uniform_grid(s.from, s.to, s.points);
  const FringeScan scan = fringe_scan(plan, s.sweep, grid, exec_options(f));

  std::vector<double> v_rates = scan.n_v();
  std::optional<NoisyScan> noisy;
  if (s.shots) {
    if (*s.shots < 1) throw Failure{kValidationFailure, "--shots must be at least 1"};
    noisy = simulate_measurement(scan, *s.shots, resolve_seed(s.seed));
    v_rates = to_fit_data(*noisy).v;
  }
  // Report lines are CSV comments so a table on stdout still reads back.
  std::ostringstream report;
  if (s.sweep == "phi") {
    const VisibilityResult vis = visibility(v_rates, grid);
    report << "# visibility=" << format_fixed(vis.value) << " phi_at_max=" << format_fixed(vis.phi_at_max) << '\n';
  }
  with_output(f.out, out, [&](std::ostream& sink) {
    if (noisy) {
      write_counts_csv(sink, *noisy);
    } else {
      write_scan_csv(sink, scan);
    }
    if (f.out.empty()) sink << report.str();
  });
  if (!f.out.empty()) out << report.str();
  return kSuccess;
}

int cmd_fit(const std::string& path, const std::string& weighting, std::ostream& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kIoFailure, "cannot read '" + path + "'"};
  FitData data;
  try {
    data = read_data_csv(in);
  } catch (const DataFormatError& e) {
    throw Failure{kIoFailure, path + ":" + e.what()};
  }
  FitOptions options;
  options.weighting = weighting == "inverse-variance" ? Weighting::InverseVariance : Weighting::Equal;
  FitResult r;
  try {
    r = fit(data, options);
  } catch (const EstimationError& e) {
    throw Failure{kIoFailure, path + ": " + e.what()};
  }
  out << summary(r) << '\n';
  return r.converged ? kSuccess : kValidationFailure;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int cmd_verify(size_t phi_points, const std::string& convention, std::ostream& out) {
  if (phi_points < 2) throw Failure{kValidationFailure, "--grid-points must be at least 2"};
  ExecOptions options;
  options.bs_convention = convention == "hadamard" ? BsConvention::Hadamard : BsConvention::Symmetric;
  const auto phis = uniform_grid(0.0, 2.0 * std::numbers::pi, phi_points);

  double dh = 0.0, dv = 0.0, dv_calibrated = 0.0;
  for (int ib = 0; ib <= 10; ++ib) {
    const double beta1 = ib / 10.0;
    for (int ig = 0; ig < 8; ++ig) {
      const double gamma = ig * std::numbers::pi / 4.0;
      ParamMap p = fig1_regime_params(beta1, gamma, 0.0);
      p.erase("phi");
      const FringeScan scan = fringe_scan(bind_parameters(fig1_template(), p), "phi", phis, options);
      for (size_t k = 0; k < phis.size(); ++k) {
        dh = std::max(dh, std::abs(scan.records[k].n_h - reference::nh_closed(beta1, gamma, phis[k])));
        const double ev = std::abs(scan.records[k].n_v - reference::nv_closed(beta1, gamma, phis[k]));
        dv = std::max(dv, ev);
        if (ig == 0) dv_calibrated = std::max(dv_calibrated, ev);
      }
    }
  }

  double dvis = 0.0;
  const auto vis_grid = uniform_grid(0.0, 2.0 * std::numbers::pi, 256);
  for (double beta1 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    ParamMap p = fig1_regime_params(beta1, 0.0, 0.0);
    p.erase("phi");
    const FringeScan scan = fringe_scan(bind_parameters(fig1_template(), p), "phi", vis_grid, options);
    dvis = std::max(dvis, std::abs(visibility(scan.n_v()).value - reference::visibility_closed(beta1)));
  }

  auto verdict = [](double d, double tol) { return d < tol ? "ok" : "MISMATCH"; };
  out << "grid: 11 beta1 x 8 gamma x " << phi_points << " phi, bs-convention " << convention << '\n';
  out << "max|dN_H| = " << sci(dh) << "  (tolerance 1e-09) " << verdict(dh, kVerifyTolerance) << '\n';
  out << "max|dN_V| = " << sci(dv) << "  (tolerance 1e-09) " << verdict(dv, kVerifyTolerance) << '\n';
  out << "max|dN_V| at gamma=0 = " << sci(dv_calibrated) << "  (tolerance 1e-09) "
      << verdict(dv_calibrated, kVerifyTolerance) << '\n';
  out << "max|nu_V - 4 beta1/5| (256 points) = " << sci(dvis) << "  (tolerance 1e-03) " << verdict(dvis, 1e-3)
      << '\n';
  const bool ok = dh < kVerifyTolerance && dv < kVerifyTolerance && dvis < 1e-3;
  out << (ok ? "verification passed" : "verification mismatch") << '\n';
  return ok ? kSuccess : kVerificationMismatch;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-source biphoton polarization interferometry simulator and estimator", "qiup"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qiup 1.0");

  std::string check_file;
  auto* check = app.add_subcommand("check", "Parse and validate a circuit file");
  check->add_option("circuit", check_file, "Circuit file")->required();

  CommonFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Evolve a circuit and print per-pair counts at the detector");
  add_circuit_flags(run_cmd, run_flags);
  run_cmd->add_option("--format", run_flags.format, "Output format")
      ->check(CLI::IsMember({"pretty", "csv"}))
      ->capture_default_str();

  CommonFlags scan_flags;
  ScanFlags scan_opts;
  auto* scan_cmd = app.add_subcommand("scan", "Sweep one free parameter and write a fringe table");
  add_circuit_flags(scan_cmd, scan_flags);
  scan_cmd->add_option("--sweep", scan_opts.sweep, "Parameter to sweep")->capture_default_str();
  scan_cmd->add_option("--from", scan_opts.from, "Sweep start (radians)")->capture_default_str();
  scan_cmd->add_option("--to", scan_opts.to, "Sweep end, excluded (radians)")->capture_default_str();
  scan_cmd->add_option("--points", scan_opts.points, "Number of grid points")->capture_default_str();
  scan_cmd->add_option("--shots", scan_opts.shots, "Emit Poisson counts with this many shots per point");
  scan_cmd->add_option("--seed", scan_opts.seed, "Seed for --shots (default: $QIUP_SEED, else 12345)");

  std::string fit_file;
  std::string weighting = "equal";
  auto* fit_cmd = app.add_subcommand("fit", "Fit beta1 and gamma to a measured or simulated table");
  fit_cmd->add_option("data", fit_file, "CSV table")->required();
  fit_cmd->add_option("--weighting", weighting, "Residual weighting")
      ->check(CLI::IsMember({"equal", "inverse-variance"}))
      ->capture_default_str();

  size_t verify_points = 64;
  std::string verify_convention = "symmetric";
  auto* verify_cmd = app.add_subcommand("verify", "Compare the engine with the closed-form counts");
  verify_cmd->add_option("--grid-points", verify_points, "phi samples per (beta1, gamma)")->capture_default_str();
  verify_cmd->add_option("--bs-convention", verify_convention, "Two-input beamsplitter matrix")
      ->check(CLI::IsMember({"symmetric", "hadamard"}))
      ->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationFailure;
  }

  try {
    if (*check) return cmd_check(check_file, out);
    if (*run_cmd) return cmd_run(run_flags, out, err);
    if (*scan_cmd) return cmd_scan(scan_flags, scan_opts, out, err);
    if (*fit_cmd) return cmd_fit(fit_file, weighting, out);
    if (*verify_cmd) return cmd_verify(verify_points, verify_convention, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  } catch (const PlanError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const ScanError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const StateError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const EstimationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  return kValidationFailure;
}

}  // namespace qiup::cli
