#include "nonloc/kernel_spec.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace nonloc {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                                        message
                                  : message),
      line_(line),
      column_(column) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

}  // namespace

KeyValueText KeyValueText::parse(const std::string& text) {
  KeyValueText out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    auto hash = s.find('#');
    if (hash != std::string::npos) s.resize(hash);
    std::size_t b = 0;
    while (b < s.size() && is_space(s[b])) ++b;
    std::size_t e = s.size();
    while (e > b && is_space(s[e - 1])) --e;
    if (b == e) continue;
    auto eq = s.find('=', b);
    if (eq == std::string::npos || eq >= e) throw ParseError(line, static_cast<int>(b) + 1, "expected `key = value`");
    std::size_t ke = eq;
    while (ke > b && is_space(s[ke - 1])) --ke;
    std::string key = s.substr(b, ke - b);
    if (!valid_key(key)) throw ParseError(line, static_cast<int>(b) + 1, "invalid key '" + key + "'");
    std::size_t vb = eq + 1;
    while (vb < e && is_space(s[vb])) ++vb;
    if (vb == e) throw ParseError(line, static_cast<int>(eq) + 2, "missing value for '" + key + "'");
    out.entries_.push_back({key, s.substr(vb, e - vb), line, static_cast<int>(vb) + 1});
  }
  return out;
}

KeyValueText KeyValueText::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void KeyValueText::add(const std::string& key, const std::string& value) {
  entries_.push_back({key, value, 0, 0});
}

const SpecEntry* KeyValueText::find(const std::string& key) const {
  const SpecEntry* hit = nullptr;
  for (const auto& e : entries_)
    if (e.key == key) hit = &e;
  return hit;
}

std::string KeyValueText::get(const std::string& key, const std::string& fallback) const {
  const SpecEntry* e = find(key);
  return e ? e->value : fallback;
}

double KeyValueText::get_double(const std::string& key, double fallback) const {
  const SpecEntry* e = find(key);
  return e ? parse_number(*e) : fallback;
}

double KeyValueText::require_double(const std::string& key) const {
  const SpecEntry* e = find(key);
  if (!e) throw ParseError(0, 0, "missing required key '" + key + "'");
  return parse_number(*e);
}

long KeyValueText::get_int(const std::string& key, long fallback) const {
  const SpecEntry* e = find(key);
  if (!e) return fallback;
  double v = parse_number(*e);
  if (v != std::floor(v)) throw ParseError(e->line, e->value_column, "expected an integer for '" + key + "'");
  return static_cast<long>(v);
}

std::vector<double> KeyValueText::get_list(const std::string& key) const {
  const SpecEntry* e = find(key);
  if (!e) return {};
  return parse_number_list(*e);
}

std::string KeyValueText::to_text() const {
  std::string out;
  for (const auto& e : entries_) out += e.key + " = " + e.value + "\n";
  return out;
}

double parse_number(const SpecEntry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ParseError(e.line, e.value_column + static_cast<int>(end - begin),
                     "expected a number for '" + e.key + "'");
  return v;
}

std::vector<double> parse_number_list(const SpecEntry& e) {
  std::vector<double> out;
  std::size_t pos = 0;
  const std::string& s = e.value;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::size_t b = pos, t = comma;
    while (b < t && is_space(s[b])) ++b;
    while (t > b && is_space(s[t - 1])) --t;
    SpecEntry item{e.key, s.substr(b, t - b), e.line, e.value_column + static_cast<int>(b)};
    out.push_back(parse_number(item));
    pos = comma + 1;
  }
  return out;
}

namespace {

const std::set<std::string> kTransforms = {"outside_ball", "exclude_ball", "cap", "symmetrize"};
const std::set<std::string> kKnown = {"family", "dimension", "s", "p", "alpha", "beta", "gamma", "M",
                                      "radius", "sigma", "amplitude", "exponent", "alphas", "s_list",
                                      "radii", "norm", "rate", "frequency", "offset"};

bool parse_flag(const SpecEntry& e) {
  if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "0") return false;
  throw ParseError(e.line, e.value_column, "expected true/false for '" + e.key + "'");
}

}  // namespace

Kernel construct(const KeyValueText& spec) {
  std::set<std::string> seen;
  for (const auto& e : spec.entries()) {
    if (kTransforms.count(e.key)) continue;
    if (!kKnown.count(e.key)) throw ParseError(e.line, 1, "unknown key '" + e.key + "'");
    if (!seen.insert(e.key).second) throw ParseError(e.line, 1, "duplicate key '" + e.key + "'");
  }
  const SpecEntry* fam = spec.find("family");
  if (!fam) throw ParseError(0, 0, "missing required key 'family'");
  const std::string family = fam->value;
  const int d = static_cast<int>(spec.get_int("dimension", 1));
  if (d < 1) throw ParseError(spec.find("dimension")->line, spec.find("dimension")->value_column,
                              "dimension must be positive");
  Norm norm = Norm::euclidean();
  if (const SpecEntry* n = spec.find("norm")) {
    try {
      norm = Norm::parse(n->value);
    } catch (const std::exception& ex) {
      throw ParseError(n->line, n->value_column, ex.what());
    }
  }
  const double p = spec.get_double("p", 1.0);

  auto wrap = [&](auto&& make) -> Kernel {
    try {
      return make();
    } catch (const std::invalid_argument& ex) {
      throw ParseError(fam->line, fam->value_column, ex.what());
    }
  };

  Kernel k;
  if (family == "fractional") {
    k = wrap([&] { return kernels::fractional(d, spec.require_double("s"), p, norm); });
  } else if (family == "power") {
    k = wrap([&] { return kernels::power(d, spec.require_double("exponent"), norm); });
  } else if (family == "piecewise-fractional") {
    k = wrap([&] {
      return kernels::piecewise_fractional(d, spec.get_list("alphas"), spec.get_list("s_list"),
                                           spec.get_list("radii"), p, norm);
    });
  } else if (family == "log-fractional") {
    k = wrap([&] { return kernels::log_fractional(d, spec.get_double("s", 0.0), spec.require_double("alpha"), norm); });
  } else if (family == "oscillating") {
    k = wrap([&] {
      return kernels::oscillating(d, spec.require_double("s"), spec.require_double("alpha"),
                                  spec.require_double("beta"), static_cast<int>(spec.get_int("M", 3)), norm);
    });
  } else if (family == "log") {
    k = wrap([&] { return kernels::log_kernel(d, spec.require_double("gamma")); });
  } else if (family == "indicator") {
    k = wrap([&] { return kernels::indicator(d, spec.get_double("radius", 1.0), norm); });
  } else if (family == "gaussian") {
    k = wrap([&] {
      return kernels::gaussian(d, spec.get_double("sigma", 1.0), spec.get_double("amplitude", 1.0), norm);
    });
  } else if (family == "one-sided-exponential") {
    if (d != 1) throw ParseError(fam->line, fam->value_column, "one-sided-exponential is one-dimensional");
    k = wrap([&] { return kernels::one_sided_exponential(spec.get_double("rate", 1.0)); });
  } else if (family == "modulated-fractional") {
    k = wrap([&] {
      return kernels::modulated_fractional(d, spec.require_double("s"), p, spec.require_double("alpha"),
                                           spec.require_double("beta"), spec.get_double("frequency", 1.0), norm);
    });
  } else if (family == "shifted-singular") {
    k = wrap([&] {
      return kernels::shifted_singular(d, spec.require_double("offset"), spec.require_double("exponent"),
                                       spec.require_double("radius"));
    });
  } else {
    throw ParseError(fam->line, fam->value_column, "unknown family '" + family + "'");
  }

  for (const auto& e : spec.entries()) {
    if (!kTransforms.count(e.key)) continue;
    try {
      if (e.key == "symmetrize") {
        if (parse_flag(e)) k = symmetrize(k);
      } else {
        Truncation t;
        t.mode = e.key == "cap" ? Truncation::Mode::Cap
                 : e.key == "outside_ball" ? Truncation::Mode::OutsideBall
                                           : Truncation::Mode::ExcludeBall;
        t.value = parse_number(e);
        k = truncate(k, t);
      }
    } catch (const std::invalid_argument& ex) {
      throw ParseError(e.line, e.value_column, ex.what());
    }
  }
  return k;
}

Kernel construct_from_text(const std::string& text) { return construct(KeyValueText::parse(text)); }

}  // namespace nonloc
