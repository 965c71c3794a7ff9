#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "qiup/circuit.hpp"
#include "qiup/format.hpp"

namespace qiup {

std::string to_string(const Diagnostic& diag) {
  std::ostringstream out;
  out << diag.line << ':' << diag.column << ": " << (diag.severity == Severity::Error ? "error" : "warning")
      << ' ' << diag.code << ": " << diag.message;
  return out.str();
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::Error) return true;
  }
  return false;
}

namespace {

struct Token {
  std::string text;
  int column;
};

struct KeywordArg {
  std::string value;
  int column;
};

bool is_path_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

/// Splits on whitespace; `key=` / `key:` followed by a separate token is
/// joined with it.
std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> raw;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    raw.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
  }
  std::vector<Token> out;
  for (size_t k = 0; k < raw.size(); ++k) {
    Token t = raw[k];
    const char last = t.text.back();
    if (t.text.size() > 1 && (last == '=' || last == ':') && k + 1 < raw.size() && raw[k + 1].text != "->") {
      t.text += raw[++k].text;
    }
    out.push_back(std::move(t));
  }
  return out;
}

class LineParser {
public:
  LineParser(int line_no, std::vector<Token> tokens, std::vector<Diagnostic>& diags)
      : line_(line_no), tokens_(std::move(tokens)), diags_(diags) {}

  std::optional<ast::Statement> run(bool& saw_detect);

private:
  void error(int column, const std::string& code, const std::string& message) {
    diags_.push_back({Severity::Error, line_, column, code, message});
    ok_ = false;
  }
  void warning(int column, const std::string& code, const std::string& message) {
    diags_.push_back({Severity::Warning, line_, column, code, message});
  }

  /// Separates positional tokens from key=value tokens and checks the
  /// allowed key set.
  bool split(const std::set<std::string>& allowed_keys);
  bool expect_positional(size_t count, const std::string& usage);
  std::optional<KeywordArg> take(const std::string& key, bool required);

  std::optional<std::string> path(const Token& t);
  std::optional<Band> band(const Token& t);
  std::optional<Polarization> pol(const Token& t, std::string_view text);
  std::optional<DslValue> value(std::string_view text, int column, bool allow_param);
  std::optional<BandSelect> band_select(const KeywordArg& arg);
  std::optional<int> source_id(std::string_view text, int column);

  std::optional<ast::Body> statement(const std::string& keyword);

  int line_;
  std::vector<Token> tokens_;
  std::vector<Diagnostic>& diags_;
  std::vector<Token> positional_;
  std::map<std::string, KeywordArg> keywords_;
  bool ok_ = true;
};

bool LineParser::split(const std::set<std::string>& allowed_keys) {
  for (size_t k = 1; k < tokens_.size(); ++k) {
    const Token& t = tokens_[k];
    const auto eq = t.text.find('=');
    if (eq == std::string::npos || eq == 0) {
      positional_.push_back(t);
      continue;
    }
    const std::string key = t.text.substr(0, eq);
    if (!allowed_keys.contains(key)) {
      error(t.column, "E_UNKNOWN_ARG", "unknown argument '" + key + "' for '" + tokens_[0].text + "'");
      continue;
    }
    if (keywords_.contains(key)) {
      error(t.column, "E_DUP_ARG", "argument '" + key + "' given twice");
      continue;
    }
    keywords_[key] = {t.text.substr(eq + 1), t.column + static_cast<int>(eq) + 1};
  }
  return ok_;
}

bool LineParser::expect_positional(size_t count, const std::string& usage) {
  if (positional_.size() != count) {
    error(tokens_[0].column, "E_ARITY",
          "'" + tokens_[0].text + "' expects " + usage + ", got " + std::to_string(positional_.size()) +
              " positional argument" + (positional_.size() == 1 ? "" : "s"));
    return false;
  }
  return true;
}

std::optional<KeywordArg> LineParser::take(const std::string& key, bool required) {
  auto it = keywords_.find(key);
  if (it == keywords_.end()) {
    if (required) {
      error(tokens_[0].column, "E_MISSING_ARG", "'" + tokens_[0].text + "' requires " + key + "=");
    }
    return std::nullopt;
  }
  if (it->second.value.empty()) {
    error(it->second.column, "E_BAD_VALUE", "empty value for " + key + "=");
    return std::nullopt;
  }
  return it->second;
}

std::optional<std::string> LineParser::path(const Token& t) {
  for (char c : t.text) {
    if (!is_path_char(c)) {
      error(t.column, "E_BAD_PATH", "invalid path identifier '" + t.text + "'");
      return std::nullopt;
    }
  }
  return t.text;
}

std::optional<Band> LineParser::band(const Token& t) {
  if (t.text == "signal") return Band::Signal;
  if (t.text == "idler") return Band::Idler;
  error(t.column, "E_BAD_VALUE", "expected 'signal' or 'idler', got '" + t.text + "'");
  return std::nullopt;
}

std::optional<Polarization> LineParser::pol(const Token& t, std::string_view text) {
  if (text == "H") return Polarization::H;
  if (text == "V") return Polarization::V;
  error(t.column, "E_BAD_VALUE", "expected polarization 'H' or 'V', got '" + std::string(text) + "'");
  return std::nullopt;
}

std::optional<DslValue> LineParser::value(std::string_view text, int column, bool allow_param) {
  if (!text.empty() && text[0] == '$') {
    const std::string_view name = text.substr(1);
    if (!allow_param || !is_identifier(name)) {
      error(column, "E_BAD_VALUE", "invalid parameter reference '" + std::string(text) + "'");
      return std::nullopt;
    }
    return DslValue{std::string(name)};
  }
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v) || text.empty()) {
    error(column, "E_BAD_NUMBER", "malformed number '" + std::string(text) + "'");
    return std::nullopt;
  }
  return DslValue{v};
}

std::optional<BandSelect> LineParser::band_select(const KeywordArg& arg) {
  if (arg.value == "signal") return BandSelect::Signal;
  if (arg.value == "idler") return BandSelect::Idler;
  if (arg.value == "both") return BandSelect::Both;
  error(arg.column, "E_BAD_VALUE", "band must be signal, idler or both, got '" + arg.value + "'");
  return std::nullopt;
}

std::optional<int> LineParser::source_id(std::string_view text, int column) {
  if (text == "1") return 1;
  if (text == "2") return 2;
  error(column, "E_BAD_VALUE", "source id must be 1 or 2, got '" + std::string(text) + "'");
  return std::nullopt;
}

std::optional<ast::Body> LineParser::statement(const std::string& kw) {
  if (kw == "source") {
    if (!split({"signal", "idler", "pol", "phase"}) || !expect_positional(1, "a source id")) return {};
    ast::Source s;
    auto id = source_id(positional_[0].text, positional_[0].column);
    auto sig = take("signal", true);
    auto idl = take("idler", true);
    auto p = take("pol", true);
    if (!ok_) return {};
    s.signal_path = path({sig->value, sig->column}).value_or("");
    s.idler_path = path({idl->value, idl->column}).value_or("");
    auto polv = pol({p->value, p->column}, p->value);
    if (auto ph = take("phase", false)) s.phase = value(ph->value, ph->column, true);
    if (!ok_) return {};
    s.id = *id;
    s.pol = *polv;
    return s;
  }
  if (kw == "prepare") {
    if (!split({"alpha", "beta", "gamma", "source"}) || !expect_positional(2, "a path and a band")) return {};
    ast::Prepare s;
    auto pth = path(positional_[0]);
    auto b = band(positional_[1]);
    auto a = take("alpha", true);
    auto be = take("beta", true);
    auto g = take("gamma", true);
    if (!ok_) return {};
    auto av = value(a->value, a->column, true);
    auto bv = value(be->value, be->column, true);
    auto gv = value(g->value, g->column, true);
    if (auto src = take("source", false)) s.source = source_id(src->value, src->column);
    if (!ok_) return {};
    s.path = *pth;
    s.band = *b;
    s.alpha = *av;
    s.beta = *bv;
    s.gamma = *gv;
    return s;
  }
  if (kw == "hwp" || kw == "qwp") {
    if (!split({"angle", "band"}) || !expect_positional(1, "a path")) return {};
    ast::WavePlate s;
    s.kind = kw == "hwp" ? WavePlateKind::HWP : WavePlateKind::QWP;
    auto pth = path(positional_[0]);
    auto a = take("angle", true);
    if (!ok_) return {};
    auto av = value(a->value, a->column, true);
    if (auto b = take("band", false)) {
      s.band = band_select(*b);
    } else {
      warning(tokens_[0].column, "W_DEFAULT_BAND", "no band given for '" + kw + "', acting on both bands");
    }
    if (!ok_) return {};
    s.path = *pth;
    s.angle = *av;
    return s;
  }
  if (kw == "bs") {
    if (!split({}) || !expect_positional(4, "'IN -> OUT_T OUT_R'")) return {};
    if (positional_[1].text != "->") {
      error(positional_[1].column, "E_SYNTAX", "expected '->'");
      return {};
    }
    auto in = path(positional_[0]);
    auto t = path(positional_[2]);
    auto r = path(positional_[3]);
    if (!ok_) return {};
    return ast::Bs{*in, *t, *r};
  }
  if (kw == "bs2") {
    if (!split({}) || !expect_positional(5, "'IN_A IN_B -> OUT_A OUT_B'")) return {};
    if (positional_[2].text != "->") {
      error(positional_[2].column, "E_SYNTAX", "expected '->'");
      return {};
    }
    auto a = path(positional_[0]);
    auto b = path(positional_[1]);
    auto oa = path(positional_[3]);
    auto ob = path(positional_[4]);
    if (!ok_) return {};
    return ast::Bs2{*a, *b, *oa, *ob};
  }
  if (kw == "dm") {
    if (!split({}) || !expect_positional(4, "'IN -> signal:OUT idler:OUT'")) return {};
    if (positional_[1].text != "->") {
      error(positional_[1].column, "E_SYNTAX", "expected '->'");
      return {};
    }
    auto routed = [&](const Token& t, const std::string& prefix) -> std::optional<std::string> {
      if (t.text.rfind(prefix, 0) != 0 || t.text.size() == prefix.size()) {
        error(t.column, "E_SYNTAX", "expected '" + prefix + "PATH', got '" + t.text + "'");
        return std::nullopt;
      }
      return path({t.text.substr(prefix.size()), t.column + static_cast<int>(prefix.size())});
    };
    auto in = path(positional_[0]);
    auto s = routed(positional_[2], "signal:");
    auto i = routed(positional_[3], "idler:");
    if (!ok_) return {};
    return ast::Dichroic{*in, *s, *i};
  }
  if (kw == "phase") {
    if (!split({"value", "band"}) || !expect_positional(1, "a path")) return {};
    ast::Phase s;
    auto pth = path(positional_[0]);
    auto v = take("value", true);
    if (!ok_) return {};
    auto vv = value(v->value, v->column, true);
    if (auto b = take("band", false)) {
      s.band = band_select(*b);
    } else {
      warning(tokens_[0].column, "W_DEFAULT_BAND", "no band given for 'phase', acting on both bands");
    }
    if (!ok_) return {};
    s.path = *pth;
    s.value = *vv;
    return s;
  }
  if (kw == "merge") {
    if (!split({}) || !expect_positional(3, "a path, a polarization and a band")) return {};
    auto pth = path(positional_[0]);
    auto p = pol(positional_[1], positional_[1].text);
    auto b = band(positional_[2]);
    if (!ok_) return {};
    return ast::Merge{*pth, *p, *b};
  }
  if (kw == "detect") {
    if (!split({}) || !expect_positional(2, "a path and a band")) return {};
    auto pth = path(positional_[0]);
    auto b = band(positional_[1]);
    if (!ok_) return {};
    return ast::Detect{*pth, *b};
  }
  error(tokens_[0].column, "E_UNKNOWN_KEYWORD", "unknown statement '" + kw + "'");
  return {};
}

std::optional<ast::Statement> LineParser::run(bool& saw_detect) {
  const Token& head = tokens_.front();
  auto body = statement(head.text);
  if (!body) return std::nullopt;
  if (std::holds_alternative<ast::Detect>(*body)) {
    if (saw_detect) {
      error(head.column, "E_MULTI_DETECT", "more than one detect statement");
      return std::nullopt;
    }
    saw_detect = true;
  }
  const Token& tail = tokens_.back();
  const int length = tail.column + static_cast<int>(tail.text.size()) - head.column;
  return ast::Statement{std::move(*body), Span{line_, head.column, length}};
}

std::string shortest(double v) {
  for (int precision = 1; precision <= 17; ++precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == v) return buf;
  }
  return format_g17(v);
}

std::string render(const DslValue& v) { return v.is_param() ? "$" + v.param() : shortest(v.literal()); }

std::string render(BandSelect b) {
  switch (b) {
    case BandSelect::Signal: return "signal";
    case BandSelect::Idler: return "idler";
    case BandSelect::Both: return "both";
  }
  return "both";
}

}  // namespace

ParseResult parse(std::string_view text) {
  ParseResult result;
  CircuitAst tree;
  bool saw_detect = false;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = tokenize(line);
    if (!tokens.empty()) {
      LineParser lp(line_no, std::move(tokens), result.diagnostics);
      if (auto stmt = lp.run(saw_detect)) tree.statements.push_back(std::move(*stmt));
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  if (!has_errors(result.diagnostics)) result.ast = std::move(tree);
  return result;
}

std::string print(const CircuitAst& tree) {
  std::ostringstream out;
  for (const auto& stmt : tree.statements) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ast::Source>) {
            out << "source " << s.id << " signal=" << s.signal_path << " idler=" << s.idler_path
                << " pol=" << to_string(s.pol);
            if (s.phase) out << " phase=" << render(*s.phase);
          } else if constexpr (std::is_same_v<T, ast::Prepare>) {
            out << "prepare " << s.path << ' ' << to_string(s.band) << " alpha=" << render(s.alpha)
                << " beta=" << render(s.beta) << " gamma=" << render(s.gamma);
            if (s.source) out << " source=" << *s.source;
          } else if constexpr (std::is_same_v<T, ast::WavePlate>) {
            out << (s.kind == WavePlateKind::HWP ? "hwp " : "qwp ") << s.path << " angle=" << render(s.angle);
            if (s.band) out << " band=" << render(*s.band);
          } else if constexpr (std::is_same_v<T, ast::Bs>) {
            out << "bs " << s.in << " -> " << s.out_t << ' ' << s.out_r;
          } else if constexpr (std::is_same_v<T, ast::Bs2>) {
            out << "bs2 " << s.in_a << ' ' << s.in_b << " -> " << s.out_a << ' ' << s.out_b;
          } else if constexpr (std::is_same_v<T, ast::Dichroic>) {
            out << "dm " << s.in << " -> signal:" << s.signal_out << " idler:" << s.idler_out;
          } else if constexpr (std::is_same_v<T, ast::Phase>) {
            out << "phase " << s.path << " value=" << render(s.value);
            if (s.band) out << " band=" << render(*s.band);
          } else if constexpr (std::is_same_v<T, ast::Merge>) {
            out << "merge " << s.path << ' ' << to_string(s.pol) << ' ' << to_string(s.band);
          } else if constexpr (std::is_same_v<T, ast::Detect>) {
            out << "detect " << s.path << ' ' << to_string(s.band);
          }
        },
        stmt.body);
    out << '\n';
  }
  return out.str();
}

}  // namespace qiup
