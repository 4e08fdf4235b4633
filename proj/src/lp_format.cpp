#include "mhc/lp_format.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr const char* kModule = "lp_format";

constexpr std::array kTags = {Provenance::intra_equal, Provenance::intra_subtree, Provenance::triangle,
                              Provenance::band_lo,     Provenance::band_hi,       Provenance::freeze_sep,
                              Provenance::freeze_merge, Provenance::cycle,   Provenance::other};

std::string tag_name(Provenance p) {
  std::string s(to_string(p));
  for (auto& c : s)
    if (c == '-') c = '_';
  return s;
}

Provenance tag_from_name(std::string_view name) {
  for (const auto p : kTags) {
    const std::string t = tag_name(p);
    if (name.size() > t.size() && name.substr(0, t.size()) == t && name[t.size()] == '_') return p;
  }
  return Provenance::other;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

[[noreturn]] void fail(const std::string& cause) { throw FormatError(kModule, "read_lp", cause); }

// Whitespace tokenizer that also splits operators and the name colon.
std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\\') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '+' || c == '-' || c == ':') {
      out.emplace_back(1, c);
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::size_t j = i + 1;
      if (j < text.size() && text[j] == '=') ++j;
      std::string op(text.substr(i, j - i));
      if (op == "=<") op = "<=";
      if (op == "=>") op = ">=";
      if (op == "<") op = "<=";
      if (op == ">") op = ">=";
      out.push_back(op);
      i = j;
    } else {
      std::size_t j = i;
      const bool numeric = std::isdigit(static_cast<unsigned char>(c)) || c == '.';
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) {
        const bool exponent_sign = numeric && (text[j] == '+' || text[j] == '-') && (text[j - 1] == 'e' || text[j - 1] == 'E');
        if (!exponent_sign && std::string_view("+-:<>=\\").find(text[j]) != std::string_view::npos) break;
        ++j;
      }
      out.emplace_back(text.substr(i, j - i));
      i = j;
    }
  }
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_number(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

double to_number(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail("bad number '" + s + "'");
  return v;
}

int var_index(const std::string& name) {
  if (name.size() < 2 || name[0] != 'b') fail("unknown variable '" + name + "'");
  int v = 0;
  const auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), v);
  if (ec != std::errc() || p != name.data() + name.size() || v < 0) fail("unknown variable '" + name + "'");
  return v;
}

struct Expr {
  std::vector<std::pair<int, double>> terms;
};

// Parses "[+|-] [coef] var ..." starting at `pos` until a relation or a
// section keyword; returns the position after the expression.
std::size_t parse_expr(const std::vector<std::string>& tok, std::size_t pos, Expr& e,
                       const std::vector<std::string>& stop) {
  double sign = 1.0;
  double coef = 1.0;
  bool have_coef = false;
  while (pos < tok.size()) {
    const std::string& t = tok[pos];
    if (t == "<=" || t == ">=" || t == "=") break;
    if (std::find(stop.begin(), stop.end(), lower(t)) != stop.end()) break;
    if (pos + 1 < tok.size() && tok[pos + 1] == ":") break;
    if (t == "+") {
      ++pos;
      continue;
    }
    if (t == "-") {
      sign = -sign;
      ++pos;
      continue;
    }
    if (is_number(t)) {
      coef = to_number(t);
      have_coef = true;
      ++pos;
      continue;
    }
    e.terms.push_back({var_index(t), sign * (have_coef ? coef : 1.0)});
    sign = 1.0;
    coef = 1.0;
    have_coef = false;
    ++pos;
  }
  if (have_coef) fail("dangling coefficient");
  return pos;
}

std::int64_t integral(double v, const char* what) {
  if (v != std::floor(v) || std::abs(v) > 9.0e15) fail(std::string("non-integer ") + what);
  return static_cast<std::int64_t>(v);
}

}  // namespace

std::string write_lp(const LpProblem& p) {
  std::ostringstream os;
  os << "Minimize\n obj:";
  bool any = false;
  for (int v = 0; v < p.size(); ++v) {
    const double q = p.objective[static_cast<std::size_t>(v)];
    if (q == 0.0) continue;
    os << (q < 0 ? " - " : " + ") << format_double(std::abs(q)) << " b" << v;
    any = true;
  }
  if (!any && p.size() > 0) os << " 0 b0";
  os << "\nSubject To\n";
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    const auto& c = p.constraints[k];
    os << ' ' << tag_name(c.tag) << '_' << k << ':';
    for (const auto& t : c.terms) os << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << " b" << t.var;
    if (c.terms.empty()) os << " 0 b0";
    os << (c.kind == ConstraintKind::equal ? " = " : " <= ") << c.rhs << '\n';
  }
  os << "Bounds\n";
  for (int v = 0; v < p.size(); ++v) {
    const auto f = p.fixed[static_cast<std::size_t>(v)];
    if (f >= 0)
      os << " b" << v << " = " << static_cast<int>(f) << '\n';
    else
      os << " 0 <= b" << v << " <= 1\n";
  }
  os << "Binaries\n";
  for (int v = 0; v < p.size(); ++v) os << " b" << v << '\n';
  os << "End\n";
  return os.str();
}

LpProblem read_lp(std::string_view text) {
  const auto tok = tokenize(text);
  const std::vector<std::string> sections = {"minimize", "subject", "bounds", "binaries", "binary", "end", "st", "s.t."};
  std::size_t pos = 0;
  if (pos >= tok.size() || lower(tok[pos]) != "minimize") fail("expected 'Minimize'");
  ++pos;
  if (pos + 1 < tok.size() && tok[pos + 1] == ":") pos += 2;
  Expr obj;
  pos = parse_expr(tok, pos, obj, sections);

  std::map<int, double> objective;
  int max_var = -1;
  for (const auto& [v, c] : obj.terms) {
    objective[v] += c;
    max_var = std::max(max_var, v);
  }

  std::vector<LinearConstraint> constraints;
  std::map<int, int> bounds;
  auto section = [&](const char* name) { return pos < tok.size() && lower(tok[pos]) == name; };
  if (section("subject")) {
    pos += 2;  // "Subject To"
  } else if (section("st") || section("s.t.")) {
    pos += 1;
  } else {
    fail("expected 'Subject To'");
  }
  while (pos < tok.size() && !section("bounds") && !section("binaries") && !section("binary") && !section("end")) {
    LinearConstraint c;
    if (pos + 1 < tok.size() && tok[pos + 1] == ":") {
      c.tag = tag_from_name(tok[pos]);
      pos += 2;
    }
    Expr e;
    pos = parse_expr(tok, pos, e, sections);
    if (pos >= tok.size()) fail("constraint without relation");
    const std::string op = tok[pos++];
    double sign = 1.0;
    if (pos < tok.size() && (tok[pos] == "-" || tok[pos] == "+")) {
      if (tok[pos] == "-") sign = -1.0;
      ++pos;
    }
    if (pos >= tok.size()) fail("constraint without right-hand side");
    const double rhs = sign * to_number(tok[pos++]);
    const double flip = op == ">=" ? -1.0 : 1.0;
    c.kind = op == "=" ? ConstraintKind::equal : ConstraintKind::less_equal;
    c.rhs = integral(flip * rhs, "right-hand side");
    // Repeated variables merge into their first occurrence.
    std::map<int, std::size_t> slot;
    std::vector<Term> merged;
    for (const auto& [v, a] : e.terms) {
      const std::int64_t k = integral(flip * a, "coefficient");
      max_var = std::max(max_var, v);
      const auto [it, fresh] = slot.try_emplace(v, merged.size());
      if (fresh) merged.push_back({v, k});
      else merged[it->second].coef += k;
    }
    for (const auto& t : merged)
      if (t.coef != 0) c.terms.push_back(t);
    constraints.push_back(std::move(c));
  }
  if (section("bounds")) {
    ++pos;
    while (pos < tok.size() && !section("binaries") && !section("binary") && !section("end")) {
      // "0 <= bK <= 1" or "bK = f"
      if (is_number(tok[pos])) {
        if (pos + 4 >= tok.size()) fail("truncated bound");
        const int v = var_index(tok[pos + 2]);
        max_var = std::max(max_var, v);
        if (to_number(tok[pos]) != 0.0 || to_number(tok[pos + 4]) != 1.0) fail("only [0,1] bounds are supported");
        pos += 5;
      } else {
        if (pos + 2 >= tok.size()) fail("truncated bound");
        const int v = var_index(tok[pos]);
        max_var = std::max(max_var, v);
        if (tok[pos + 1] != "=") fail("unsupported bound on " + tok[pos]);
        const double f = to_number(tok[pos + 2]);
        if (f != 0.0 && f != 1.0) fail("fixing must be 0 or 1");
        bounds[v] = static_cast<int>(f);
        pos += 3;
      }
    }
  }
  if (section("binaries") || section("binary")) {
    ++pos;
    while (pos < tok.size() && !section("end")) max_var = std::max(max_var, var_index(tok[pos++]));
  }
  if (!section("end")) fail("expected 'End'");

  LpProblem p(std::vector<double>(static_cast<std::size_t>(max_var + 1), 0.0));
  for (const auto& [v, c] : objective) p.objective[static_cast<std::size_t>(v)] = c;
  for (const auto& [v, f] : bounds) p.fix(v, f);
  p.constraints = std::move(constraints);
  return p;
}

void save_lp(const LpProblem& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::input, kModule, "save_lp", "cannot open " + path.string());
  out << write_lp(p);
  if (!out) throw Error(ErrorKind::input, kModule, "save_lp", "write failed: " + path.string());
}

LpProblem load_lp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::input, kModule, "load_lp", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_lp(ss.str());
}

}  // namespace mhc
