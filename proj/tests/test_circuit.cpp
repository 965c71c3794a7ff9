#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "qiup/circuit.hpp"
#include "qiup/engine.hpp"
#include "qiup/observables.hpp"
#include "test_support.hpp"

using namespace qiup;
using namespace qiup::testing;

namespace {

const char* kCircuits[] = {"circuits/fig1.qiup", "circuits/fig1_waveplates.qiup", "circuits/single_source.qiup",
                           "circuits/mzi_only.qiup"};

struct Golden {
  std::string file;
  std::string code;
  int line;
  int column;
};

std::vector<Golden> load_golden() {
  std::istringstream in(read_corpus("negative/golden.txt"));
  std::vector<Golden> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    Golden g;
    std::string loc;
    row >> g.file >> g.code >> loc;
    g.line = std::stoi(loc.substr(0, loc.find(':')));
    g.column = std::stoi(loc.substr(loc.find(':') + 1));
    out.push_back(g);
  }
  return out;
}

const Diagnostic* first_error(const std::vector<Diagnostic>& d) {
  auto it = std::find_if(d.begin(), d.end(), [](const Diagnostic& x) { return x.severity == Severity::Error; });
  return it == d.end() ? nullptr : &*it;
}

}  // namespace

TEST_CASE("parse the two-crystal circuit") {
  const auto r = parse(read_corpus("circuits/fig1.qiup"));
  REQUIRE(r.ast);
  CHECK(r.diagnostics.empty());
  const auto& st = r.ast->statements;
  REQUIRE(st.size() == 14);
  const auto& src2 = std::get<ast::Source>(st[1].body);
  CHECK(src2.id == 2);
  CHECK(src2.signal_path == "r");
  REQUIRE(src2.phase);
  CHECK(src2.phase->param() == "phi");
  const auto& prep = std::get<ast::Prepare>(st[3].body);
  CHECK(prep.path == "r");
  CHECK(prep.band == Band::Idler);
  CHECK(prep.source == 1);
  CHECK(prep.alpha.param() == "alpha1");
  const auto& bs2 = std::get<ast::Bs2>(st[10].body);
  CHECK(bs2.out_a == "e'");
  CHECK(std::get<ast::Detect>(st[13].body).path == "o'");
}

TEST_CASE("default band warning") {
  const auto r = parse(read_corpus("circuits/single_source.qiup"));
  REQUIRE(r.ast);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].severity == Severity::Warning);
  CHECK(r.diagnostics[0].code == "W_DEFAULT_BAND");
  CHECK(r.diagnostics[0].line == 2);
}

TEST_CASE("arity error carries the statement span") {
  const auto r = parse("source 1 signal=a idler=a pol=V\nbs a -> e\ndetect e signal\n");
  const Diagnostic* d = first_error(r.diagnostics);
  REQUIRE(d);
  CHECK(d->code == "E_ARITY");
  CHECK(d->line == 2);
  CHECK(d->column == 1);
  CHECK(to_string(*d).rfind("2:1: error E_ARITY: ", 0) == 0);
}

TEST_CASE("diagnostic codes for malformed statements") {
  struct Case {
    const char* text;
    const char* code;
  };
  const Case cases[] = {
      {"frobnicate a\n", "E_UNKNOWN_KEYWORD"},
      {"hwp f angle=1x2\n", "E_BAD_NUMBER"},
      {"hwp f angle=inf\n", "E_BAD_NUMBER"},
      {"hwp f\n", "E_MISSING_ARG"},
      {"hwp f angle=1 spin=2\n", "E_UNKNOWN_ARG"},
      {"hwp f angle=1 angle=2\n", "E_DUP_ARG"},
      {"source 1 signal=a idler=a pol=D\n", "E_BAD_VALUE"},
      {"bs r => e f\n", "E_SYNTAX"},
      {"bs r e f\n", "E_ARITY"},
      {"bs r% -> e f\n", "E_BAD_PATH"},
      {"detect a signal\ndetect b signal\n", "E_MULTI_DETECT"},
  };
  for (const auto& c : cases) {
    CAPTURE(std::string(c.text));
    CAPTURE(std::string(c.code));
    const auto r = parse(c.text);
    const Diagnostic* d = first_error(r.diagnostics);
    REQUIRE(d);
    CHECK(d->code == c.code);
  }
}

TEST_CASE("print/parse round trip over the corpus") {
  for (const char* file : kCircuits) {
    CAPTURE(file);
    const auto first = parse(read_corpus(file));
    REQUIRE(first.ast);
    const std::string text = print(*first.ast);
    const auto second = parse(text);
    REQUIRE(second.ast);
    CHECK(*second.ast == *first.ast);
    CHECK(print(*second.ast) == text);
  }
}

TEST_CASE("validate collects free parameters") {
  const auto v = compile(read_corpus("circuits/fig1.qiup"));
  REQUIRE(v.plan);
  CHECK(v.plan->free_parameters() ==
        std::set<std::string>{"alpha1", "alpha2", "beta1", "beta2", "gamma", "phi", "theta"});
  CHECK(v.plan->detect_path == PathId("o'"));
  CHECK(v.plan->detect_band == Band::Signal);
}

TEST_CASE("validate flags unknown paths by name") {
  const auto v = compile(read_corpus("negative/unknown_path.qiup"));
  CHECK_FALSE(v.plan);
  const Diagnostic* d = first_error(v.diagnostics);
  REQUIRE(d);
  CHECK(d->code == "E_UNKNOWN_PATH");
  CHECK(d->message.find("'z'") != std::string::npos);
}

TEST_CASE("literal angles are degrees, parameters are radians") {
  const auto v = compile("source 1 signal=a idler=a pol=V\nhwp a angle=45 band=idler\nphase a value=$p\n"
                         "detect a signal\n");
  REQUIRE(v.plan);
  const auto& hwp = std::get<step::WavePlate>(v.plan->pipeline[0]);
  CHECK(hwp.angle.value == doctest::Approx(kPi / 4));
  const auto bound = bind_parameters(*v.plan, {{"p", 1.25}});
  CHECK(std::get<step::Phase>(bound.pipeline[1]).value == Scalar::of(1.25));
}

TEST_CASE("negative corpus matches the golden locations") {
  const auto golden = load_golden();
  CHECK(golden.size() == 10);
  for (const auto& g : golden) {
    CAPTURE(g.file);
    const auto v = compile(read_corpus("negative/" + g.file));
    CHECK_FALSE(v.plan);
    const Diagnostic* d = first_error(v.diagnostics);
    REQUIRE(d);
    CHECK(d->code == g.code);
    CHECK(d->line == g.line);
    CHECK(d->column == g.column);
  }
}

TEST_CASE("positive corpus compiles without errors") {
  for (const char* file : kCircuits) {
    CAPTURE(file);
    const auto v = compile(read_corpus(file));
    CHECK(v.plan);
    CHECK_FALSE(has_errors(v.diagnostics));
  }
}

TEST_CASE("fig1 preset equals the bound corpus circuit") {
  const ParamMap params = fig1_regime_params(0.6, 0.7, 0.3);
  const auto v = compile(read_corpus("circuits/fig1.qiup"));
  REQUIRE(v.plan);
  CHECK(bind_parameters(*v.plan, params) == fig1_preset(params));
  CHECK(bind_parameters(fig1_template(), params) == fig1_preset(params));
}

TEST_CASE("fig1 preset parameter errors") {
  ParamMap params = fig1_regime_params(0.6, 0.7, 0.3);
  params.erase("phi");
  try {
    fig1_preset(params);
    FAIL("expected E_MISSING_PARAM");
  } catch (const PlanError& e) {
    CHECK(e.code() == "E_MISSING_PARAM");
    CHECK(std::string(e.what()).find("phi") != std::string::npos);
  }
  params = fig1_regime_params(0.6, 0.7, 0.3);
  params["alpha1"] = 0.5;
  try {
    fig1_preset(params);
    FAIL("expected E_NORM");
  } catch (const PlanError& e) {
    CHECK(e.code() == "E_NORM");
  }
}

TEST_CASE("require_bound names the missing parameter") {
  try {
    require_bound(fig1_template());
    FAIL("expected E_MISSING_PARAM");
  } catch (const PlanError& e) {
    CHECK(e.code() == "E_MISSING_PARAM");
  }
}

TEST_CASE("property: diagnostic positions lie inside the text") {
  std::mt19937_64 rng(99);
  const std::string alphabet = "abz01 =->:$'#\n\tVH.e+";
  const char* words[] = {"source ", "bs ", "bs2 ", "dm ", "hwp ", "qwp ", "prepare ", "merge ", "detect ", "phase "};
  std::uniform_int_distribution<size_t> ch(0, alphabet.size() - 1), word(0, 9), len(0, 60);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const size_t n = len(rng);
    for (size_t k = 0; k < n; ++k) {
      if (k % 12 == 0) text += words[word(rng)];
      text += alphabet[ch(rng)];
    }
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    const auto v = compile(text);
    for (const auto& d : v.diagnostics) {
      CAPTURE(text);
      CAPTURE(to_string(d));
      CHECK(d.line >= 1);
      CHECK(d.column >= 1);
      if (d.line == 1 && d.column == 1) continue;
      REQUIRE(static_cast<size_t>(d.line) <= lines.size());
      CHECK(static_cast<size_t>(d.column) <= lines[static_cast<size_t>(d.line - 1)].size());
    }
  }
}

TEST_CASE("at theta = 0 the tagged idler never becomes vertical") {
  ParamMap params = fig1_regime_params(0.6, 0.4, 1.0);
  params["theta"] = 0.0;
  std::vector<StepTrace> trace;
  execute(fig1_preset(params), {}, &trace);
  // trace[0] is the initial state; the last merge is pipeline step 6
  REQUIRE(trace.size() == 12);
  for (size_t s = 6; s < trace.size(); ++s) {
    const auto& t = trace[s];
    for (const auto& [k, amp] : t.state) {
      const Mode& idler = k.idler();
      if (idler.tag == SourceTag::tagged(1)) CHECK(idler.pol == Polarization::H);
    }
  }
}

TEST_CASE("describe gives one line per step") {
  const auto plan = fig1_template();
  CHECK(describe(plan.pipeline[0]) == "dm a -> signal:b idler:r");
  CHECK(describe(plan.pipeline[7]) == "hwp f angle=$theta band=both");
}
