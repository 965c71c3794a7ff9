#pragma once

// Line-oriented circuit description language.
//
//   # comment
//   source 1 signal=a idler=a pol=V [phase=NUM|$p]
//   prepare r idler alpha=VAL beta=VAL gamma=VAL [source=K]
//   hwp f angle=VAL [band=signal|idler|both]
//   qwp f angle=VAL [band=...]
//   bs r -> e f
//   bs2 e f -> e' f'
//   dm a -> signal:b idler:r
//   phase p value=VAL [band=...]
//   merge r V idler
//   detect o' signal
//
// Numeric angles and phases are degrees. `$name` introduces a free
// parameter whose bound value is always radians.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qiup/elements.hpp"
#include "qiup/state.hpp"

namespace qiup {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  int line = 1;
  int column = 1;
  std::string code;
  std::string message;
};

/// `line:col: error CODE: message`
std::string to_string(const Diagnostic& diag);
bool has_errors(const std::vector<Diagnostic>& diags);

struct Span {
  int line = 1;
  int column = 1;
  int length = 0;
};

/// A literal (in DSL units) or a `$name` reference.
struct DslValue {
  std::variant<double, std::string> v;

  bool is_param() const { return std::holds_alternative<std::string>(v); }
  double literal() const { return std::get<double>(v); }
  const std::string& param() const { return std::get<std::string>(v); }

  friend bool operator==(const DslValue&, const DslValue&) = default;
};

enum class BandSelect { Signal, Idler, Both };

namespace ast {

struct Source {
  int id = 1;
  std::string signal_path;
  std::string idler_path;
  Polarization pol = Polarization::V;
  std::optional<DslValue> phase;
  friend bool operator==(const Source&, const Source&) = default;
};

struct Prepare {
  std::string path;
  Band band = Band::Idler;
  DslValue alpha;
  DslValue beta;
  DslValue gamma;
  std::optional<int> source;
  friend bool operator==(const Prepare&, const Prepare&) = default;
};

struct WavePlate {
  WavePlateKind kind = WavePlateKind::HWP;
  std::string path;
  DslValue angle;
  std::optional<BandSelect> band;
  friend bool operator==(const WavePlate&, const WavePlate&) = default;
};

struct Bs {
  std::string in;
  std::string out_t;
  std::string out_r;
  friend bool operator==(const Bs&, const Bs&) = default;
};

struct Bs2 {
  std::string in_a;
  std::string in_b;
  std::string out_a;
  std::string out_b;
  friend bool operator==(const Bs2&, const Bs2&) = default;
};

struct Dichroic {
  std::string in;
  std::string signal_out;
  std::string idler_out;
  friend bool operator==(const Dichroic&, const Dichroic&) = default;
};

struct Phase {
  std::string path;
  DslValue value;
  std::optional<BandSelect> band;
  friend bool operator==(const Phase&, const Phase&) = default;
};

struct Merge {
  std::string path;
  Polarization pol = Polarization::V;
  Band band = Band::Idler;
  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Detect {
  std::string path;
  Band band = Band::Signal;
  friend bool operator==(const Detect&, const Detect&) = default;
};

using Body = std::variant<Source, Prepare, WavePlate, Bs, Bs2, Dichroic, Phase, Merge, Detect>;

struct Statement {
  Body body;
  Span span;

  /// Spans are not part of statement identity.
  friend bool operator==(const Statement& a, const Statement& b) { return a.body == b.body; }
};

}  // namespace ast

struct CircuitAst {
  std::vector<ast::Statement> statements;
  friend bool operator==(const CircuitAst&, const CircuitAst&) = default;
};

struct ParseResult {
  std::optional<CircuitAst> ast;
  std::vector<Diagnostic> diagnostics;
};

ParseResult parse(std::string_view text);

/// Canonical text form; parse(print(ast)) reproduces ast.
std::string print(const CircuitAst& ast);

// ---------------------------------------------------------------------------
// Executable plans

/// A plan scalar in internal units (radians for angles): bound value or
/// named free parameter.
struct Scalar {
  double value = 0.0;
  std::string param;

  static Scalar of(double v) { return {v, {}}; }
  static Scalar named(std::string name) { return {0.0, std::move(name)}; }
  bool bound() const { return param.empty(); }

  friend bool operator==(const Scalar&, const Scalar&) = default;
};

struct PlanSource {
  int source_id = 1;
  PathId signal_path;
  PathId idler_path;
  Polarization pol = Polarization::V;
  Scalar phase;
  friend bool operator==(const PlanSource&, const PlanSource&) = default;
};

namespace step {

struct Prepare {
  PathId path;
  Band band = Band::Idler;
  Scalar alpha;
  Scalar beta;
  Scalar gamma;
  Scalar alpha_phase;
  std::optional<int> source;
  friend bool operator==(const Prepare&, const Prepare&) = default;
};

struct WavePlate {
  WavePlateKind kind = WavePlateKind::HWP;
  PathId path;
  std::optional<Band> band;
  Scalar angle;
  friend bool operator==(const WavePlate&, const WavePlate&) = default;
};

struct Bs {
  PathId in, out_t, out_r;
  friend bool operator==(const Bs&, const Bs&) = default;
};

struct Bs2 {
  PathId in_a, in_b, out_a, out_b;
  friend bool operator==(const Bs2&, const Bs2&) = default;
};

struct Dichroic {
  PathId in, signal_out, idler_out;
  friend bool operator==(const Dichroic&, const Dichroic&) = default;
};

struct Phase {
  PathId path;
  std::optional<Band> band;
  Scalar value;
  friend bool operator==(const Phase&, const Phase&) = default;
};

struct Merge {
  MergeRule rule;
  friend bool operator==(const Merge& a, const Merge& b) {
    return a.rule.path == b.rule.path && a.rule.pol == b.rule.pol && a.rule.band == b.rule.band;
  }
};

}  // namespace step

using PlanStep =
    std::variant<step::Prepare, step::WavePlate, step::Bs, step::Bs2, step::Dichroic, step::Phase, step::Merge>;

std::string describe(const PlanStep& s);

struct CircuitPlan {
  std::vector<PlanSource> sources;
  std::vector<PlanStep> pipeline;
  PathId detect_path;
  Band detect_band = Band::Signal;

  std::set<std::string> free_parameters() const;

  friend bool operator==(const CircuitPlan&, const CircuitPlan&) = default;
};

/// Carries a stable diagnostic code such as E_MISSING_PARAM or E_NORM.
class PlanError : public std::runtime_error {
public:
  PlanError(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

struct ValidateResult {
  std::optional<CircuitPlan> plan;
  std::vector<Diagnostic> diagnostics;
};

ValidateResult validate(const CircuitAst& ast);

/// parse + validate; diagnostics from both stages.
ValidateResult compile(std::string_view text);

using ParamMap = std::map<std::string, double>;

/// Substitutes every named scalar present in `params`. Throws E_NORM when a
/// fully bound preparation violates alpha^2 + beta^2 = 1.
CircuitPlan bind_parameters(const CircuitPlan& plan, const ParamMap& params);

/// Throws E_MISSING_PARAM naming the first unbound parameter.
void require_bound(const CircuitPlan& plan);

/// The two-crystal circuit with a Mach-Zehnder stage, all seven parameters
/// (phi, theta, alpha1, beta1, gamma, alpha2, beta2) free.
CircuitPlan fig1_template();

/// fig1_template() with every parameter bound; E_MISSING_PARAM / E_NORM.
CircuitPlan fig1_preset(const ParamMap& params);

/// Parameters of the closed-form regime: beta2 = 1, theta = 45 deg,
/// alpha1 = sqrt(1 - beta1^2).
ParamMap fig1_regime_params(double beta1, double gamma, double phi);

}  // namespace qiup
