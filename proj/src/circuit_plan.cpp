#include <cmath>
#include <numbers>
#include <sstream>

#include "qiup/circuit.hpp"
#include "qiup/format.hpp"

namespace qiup {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

/// Literal angles arrive in degrees; parameters stay symbolic.
Scalar angle_scalar(const DslValue& v) {
  return v.is_param() ? Scalar::named(v.param()) : Scalar::of(v.literal() * kDegree);
}

Scalar plain_scalar(const DslValue& v) {
  return v.is_param() ? Scalar::named(v.param()) : Scalar::of(v.literal());
}

std::optional<Band> to_filter(std::optional<BandSelect> b) {
  if (!b || *b == BandSelect::Both) return std::nullopt;
  return *b == BandSelect::Signal ? Band::Signal : Band::Idler;
}

void collect(const Scalar& s, std::set<std::string>& out) {
  if (!s.bound()) out.insert(s.param);
}

void substitute(Scalar& s, const ParamMap& params) {
  if (s.bound()) return;
  if (auto it = params.find(s.param); it != params.end()) s = Scalar::of(it->second);
}

void check_norm(const step::Prepare& p) {
  if (!p.alpha.bound() || !p.beta.bound()) return;
  PreparationSpec spec{p.alpha.value, p.beta.value, 0.0, 0.0};
  try {
    spec.check_normalized();
  } catch (const PreparationError& e) {
    throw PlanError("E_NORM", "prepare " + p.path.name() + " " + to_string(p.band) + ": " + e.what());
  }
}

std::string filter_name(std::optional<Band> b) { return b ? to_string(*b) : "both"; }

std::string scalar_text(const Scalar& s) { return s.bound() ? format_g17(s.value) : "$" + s.param; }

}  // namespace

std::string describe(const PlanStep& s) {
  std::ostringstream out;
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, step::Prepare>) {
          out << "prepare " << st.path.name() << ' ' << to_string(st.band);
        } else if constexpr (std::is_same_v<T, step::WavePlate>) {
          out << (st.kind == WavePlateKind::HWP ? "hwp " : "qwp ") << st.path.name() << " angle="
              << scalar_text(st.angle) << " band=" << filter_name(st.band);
        } else if constexpr (std::is_same_v<T, step::Bs>) {
          out << "bs " << st.in.name() << " -> " << st.out_t.name() << ' ' << st.out_r.name();
        } else if constexpr (std::is_same_v<T, step::Bs2>) {
          out << "bs2 " << st.in_a.name() << ' ' << st.in_b.name() << " -> " << st.out_a.name() << ' '
              << st.out_b.name();
        } else if constexpr (std::is_same_v<T, step::Dichroic>) {
          out << "dm " << st.in.name() << " -> signal:" << st.signal_out.name()
              << " idler:" << st.idler_out.name();
        } else if constexpr (std::is_same_v<T, step::Phase>) {
          out << "phase " << st.path.name() << " value=" << scalar_text(st.value);
        } else if constexpr (std::is_same_v<T, step::Merge>) {
          out << "merge " << st.rule.path.name() << ' ' << to_string(st.rule.pol) << ' '
              << to_string(st.rule.band);
        }
      },
      s);
  return out.str();
}

std::set<std::string> CircuitPlan::free_parameters() const {
  std::set<std::string> out;
  for (const auto& src : sources) collect(src.phase, out);
  for (const auto& s : pipeline) {
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, step::Prepare>) {
            collect(st.alpha, out);
            collect(st.beta, out);
            collect(st.gamma, out);
            collect(st.alpha_phase, out);
          } else if constexpr (std::is_same_v<T, step::WavePlate>) {
            collect(st.angle, out);
          } else if constexpr (std::is_same_v<T, step::Phase>) {
            collect(st.value, out);
          }
        },
        s);
  }
  return out;
}

ValidateResult validate(const CircuitAst& tree) {
  ValidateResult result;
  auto& diags = result.diagnostics;
  CircuitPlan plan;
  std::set<std::string> written;
  std::set<int> source_ids;
  int detects = 0;
  std::optional<ast::Detect> detect;

  for (const auto& stmt : tree.statements) {
    const Span& sp = stmt.span;
    auto err = [&](const std::string& code, const std::string& msg) {
      diags.push_back({Severity::Error, sp.line, sp.column, code, msg});
    };
    auto reads = [&](const std::string& p) {
      if (!written.contains(p)) {
        err("E_UNKNOWN_PATH", "path '" + p + "' is used before any element produces it");
        return false;
      }
      return true;
    };

    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ast::Source>) {
            if (!source_ids.insert(s.id).second) {
              err("E_DUP_SOURCE", "source " + std::to_string(s.id) + " declared twice");
              return;
            }
            written.insert(s.signal_path);
            written.insert(s.idler_path);
            plan.sources.push_back({s.id, s.signal_path, s.idler_path, s.pol,
                                    s.phase ? angle_scalar(*s.phase) : Scalar::of(0.0)});
          } else if constexpr (std::is_same_v<T, ast::Prepare>) {
            if (!reads(s.path)) return;
            step::Prepare p{s.path, s.band, plain_scalar(s.alpha), plain_scalar(s.beta), angle_scalar(s.gamma),
                            Scalar::of(0.0), s.source};
            try {
              check_norm(p);
            } catch (const PlanError& e) {
              err(e.code(), e.what());
              return;
            }
            plan.pipeline.emplace_back(std::move(p));
          } else if constexpr (std::is_same_v<T, ast::WavePlate>) {
            if (!reads(s.path)) return;
            plan.pipeline.emplace_back(step::WavePlate{s.kind, s.path, to_filter(s.band), angle_scalar(s.angle)});
          } else if constexpr (std::is_same_v<T, ast::Bs>) {
            if (!reads(s.in)) return;
            if (s.out_t == s.out_r) {
              err("E_BS_ALIAS", "beamsplitter outputs must differ");
              return;
            }
            written.insert(s.out_t);
            written.insert(s.out_r);
            plan.pipeline.emplace_back(step::Bs{s.in, s.out_t, s.out_r});
          } else if constexpr (std::is_same_v<T, ast::Bs2>) {
            if (!reads(s.in_a) || !reads(s.in_b)) return;
            if (s.out_a == s.out_b || s.in_a == s.in_b) {
              err("E_BS_ALIAS", "beamsplitter inputs and outputs must be distinct pairs");
              return;
            }
            written.insert(s.out_a);
            written.insert(s.out_b);
            plan.pipeline.emplace_back(step::Bs2{s.in_a, s.in_b, s.out_a, s.out_b});
          } else if constexpr (std::is_same_v<T, ast::Dichroic>) {
            if (!reads(s.in)) return;
            if (s.signal_out == s.idler_out) {
              err("E_DM_ALIAS", "dichroic routes both bands to '" + s.signal_out + "'");
              return;
            }
            written.insert(s.signal_out);
            written.insert(s.idler_out);
            plan.pipeline.emplace_back(step::Dichroic{s.in, s.signal_out, s.idler_out});
          } else if constexpr (std::is_same_v<T, ast::Phase>) {
            if (!reads(s.path)) return;
            plan.pipeline.emplace_back(step::Phase{s.path, to_filter(s.band), angle_scalar(s.value)});
          } else if constexpr (std::is_same_v<T, ast::Merge>) {
            if (!reads(s.path)) return;
            plan.pipeline.emplace_back(step::Merge{MergeRule{s.path, s.pol, s.band}});
          } else if constexpr (std::is_same_v<T, ast::Detect>) {
            ++detects;
            if (detects > 1) {
              err("E_MULTI_DETECT", "more than one detect statement");
              return;
            }
            if (!reads(s.path)) return;
            detect = s;
          }
        },
        stmt.body);
  }

  if (plan.sources.empty() && !has_errors(diags)) {
    diags.push_back({Severity::Error, 1, 1, "E_NO_SOURCE", "circuit declares no source"});
  }
  if (detects == 0) {
    diags.push_back({Severity::Error, 1, 1, "E_NO_DETECT", "circuit has no detect statement"});
  }
  if (has_errors(diags)) return result;
  plan.detect_path = detect->path;
  plan.detect_band = detect->band;
  result.plan = std::move(plan);
  return result;
}

ValidateResult compile(std::string_view text) {
  ParseResult parsed = parse(text);
  if (!parsed.ast) return {std::nullopt, std::move(parsed.diagnostics)};
  ValidateResult v = validate(*parsed.ast);
  parsed.diagnostics.insert(parsed.diagnostics.end(), v.diagnostics.begin(), v.diagnostics.end());
  v.diagnostics = std::move(parsed.diagnostics);
  return v;
}

CircuitPlan bind_parameters(const CircuitPlan& plan, const ParamMap& params) {
  CircuitPlan out = plan;
  for (auto& src : out.sources) substitute(src.phase, params);
  for (auto& s : out.pipeline) {
    std::visit(
        [&](auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, step::Prepare>) {
            substitute(st.alpha, params);
            substitute(st.beta, params);
            substitute(st.gamma, params);
            substitute(st.alpha_phase, params);
            check_norm(st);
          } else if constexpr (std::is_same_v<T, step::WavePlate>) {
            substitute(st.angle, params);
          } else if constexpr (std::is_same_v<T, step::Phase>) {
            substitute(st.value, params);
          }
        },
        s);
  }
  return out;
}

void require_bound(const CircuitPlan& plan) {
  const auto free = plan.free_parameters();
  if (!free.empty()) throw PlanError("E_MISSING_PARAM", "parameter '" + *free.begin() + "' is not bound");
}

CircuitPlan fig1_template() {
  CircuitPlan plan;
  plan.sources = {
      {1, "a", "a", Polarization::V, Scalar::of(0.0)},
      {2, "r", "r", Polarization::V, Scalar::named("phi")},
  };
  plan.pipeline = {
      step::Dichroic{"a", "b", "r"},
      step::Prepare{"r", Band::Idler, Scalar::named("alpha1"), Scalar::named("beta1"), Scalar::named("gamma"),
                    Scalar::of(0.0), 1},
      step::Prepare{"b", Band::Signal, Scalar::named("alpha2"), Scalar::named("beta2"), Scalar::of(0.0),
                    Scalar::of(0.0), 1},
      step::Merge{{"r", Polarization::V, Band::Idler}},
      step::Merge{{"b", Polarization::V, Band::Signal}},
      step::Merge{{"r", Polarization::V, Band::Signal}},
      step::Bs{"r", "e", "f"},
      step::WavePlate{WavePlateKind::HWP, "f", std::nullopt, Scalar::named("theta")},
      step::Bs2{"e", "f", "e'", "f'"},
      step::Dichroic{"f'", "o", "f'"},
      step::Bs2{"o", "b", "o'", "b'"},
  };
  plan.detect_path = "o'";
  plan.detect_band = Band::Signal;
  return plan;
}

CircuitPlan fig1_preset(const ParamMap& params) {
  for (const char* name : {"phi", "theta", "alpha1", "beta1", "gamma", "alpha2", "beta2"}) {
    if (!params.contains(name)) {
      throw PlanError("E_MISSING_PARAM", std::string("fig1 preset requires parameter '") + name + "'");
    }
  }
  CircuitPlan plan = bind_parameters(fig1_template(), params);
  require_bound(plan);
  return plan;
}

ParamMap fig1_regime_params(double beta1, double gamma, double phi) {
  return {{"phi", phi},
          {"theta", std::numbers::pi / 4.0},
          {"alpha1", std::sqrt(std::max(0.0, 1.0 - beta1 * beta1))},
          {"beta1", beta1},
          {"gamma", gamma},
          {"alpha2", 0.0},
          {"beta2", 1.0}};
}

}  // namespace qiup
