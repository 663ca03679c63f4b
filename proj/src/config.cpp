#include "volterra/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "volterra/errors.hpp"

namespace volterra {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ValidationError("config line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || s.empty()) fail(line, "expected a number, got '" + s + "'");
  return v;
}

std::uint64_t to_count(const std::string& raw, int line) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    fail(line, "expected a non-negative integer, got '" + s + "'");
  return v;
}

std::string to_string_value(const std::string& raw) {
  std::string s = trim(raw);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

// Flat list "[a, b, c]".
std::vector<double> to_list(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail(line, "expected a list [a, b, ...]");
  const std::string body = trim(s.substr(1, s.size() - 2));
  std::vector<double> out;
  if (body.empty()) return out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item, line));
  return out;
}

std::vector<std::pair<double, double>> to_pairs(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail(line, "expected [[t, m], ...]");
  std::vector<std::pair<double, double>> out;
  std::size_t i = 1;
  while (true) {
    const auto open = s.find('[', i);
    if (open == std::string::npos) break;
    const auto close = s.find(']', open);
    if (close == std::string::npos) fail(line, "unbalanced brackets");
    const auto v = to_list(s.substr(open, close - open + 1), line);
    if (v.size() != 2) fail(line, "each atom needs a location and a mass");
    out.emplace_back(v[0], v[1]);
    i = close + 1;
  }
  return out;
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + "]";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  using Setter = std::function<void(const std::string&, int)>;
  auto str = [](std::string& dst) -> Setter { return [&dst](const std::string& v, int) { dst = to_string_value(v); }; };
  auto dbl = [](double& dst) -> Setter { return [&dst](const std::string& v, int l) { dst = to_double(v, l); }; };
  auto cnt = [](std::uint64_t& dst) -> Setter { return [&dst](const std::string& v, int l) { dst = to_count(v, l); }; };

  const std::map<std::string, Setter> keys = {
      {"run.name", str(c.name)},
      {"kernel.atoms", [&c](const std::string& v, int l) { c.atoms = to_pairs(v, l); }},
      {"kernel.density", str(c.density)},
      {"kernel.cutoff", dbl(c.cutoff)},
      {"nonlinearity.family", str(c.family)},
      {"nonlinearity.beta", dbl(c.beta)},
      {"nonlinearity.f", str(c.f_expr)},
      {"nonlinearity.phi", str(c.phi_expr)},
      {"forcing.kind", str(c.forcing_kind)},
      {"forcing.name", str(c.forcing_name)},
      {"forcing.params", [&c](const std::string& v, int l) { c.forcing_params = to_list(v, l); }},
      {"forcing.target", str(c.forcing_target)},
      {"forcing.expr", str(c.forcing_expr)},
      {"noise.kind", str(c.noise_kind)},
      {"noise.sigma", str(c.sigma)},
      {"noise.alpha", dbl(c.alpha)},
      {"noise.scale", dbl(c.scale)},
      {"noise.skew", dbl(c.skew)},
      {"noise.seed", cnt(c.seed)},
      {"noise.paths", cnt(c.paths)},
      {"grid.T", dbl(c.T)},
      {"grid.dt", dbl(c.dt)},
      {"initial.psi", [&c](const std::string& v, int l) { c.psi = to_double(v, l); }},
      {"output.snapshots", cnt(c.snapshots)},
      {"analysis.mode", str(c.mode)},
      {"analysis.L", str(c.L)},
      {"analysis.L_horizon", dbl(c.L_horizon)},
      {"analysis.envelope", str(c.envelope)},
      {"analysis.envelope_role", str(c.envelope_role)},
      {"analysis.tolerance", dbl(c.tolerance)},
      {"analysis.lil_tolerance", dbl(c.lil_tolerance)},
      {"analysis.required_fraction", dbl(c.required_fraction)},
      {"convergence.levels", cnt(c.levels)},
  };

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.rfind("assert.", 0) == 0 && key.size() > 7) {
      const auto v = to_list(value, line);
      if (v.size() != 2 || !(v[0] <= v[1])) fail(line, "assertion needs [lo, hi] with lo <= hi");
      c.assertions[key.substr(7)] = {v[0], v[1]};
      continue;
    }
    const auto it = keys.find(key);
    if (it == keys.end()) fail(line, "unknown key '" + key + "'");
    it->second(value, line);
  }
  if (!(c.T > 0.0) || !(c.dt > 0.0) || c.dt > c.T) throw ValidationError("config: need 0 < grid.dt <= grid.T");
  if (c.snapshots < 2) throw ValidationError("config: output.snapshots must be at least 2");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  auto kv = [&o](const char* key, const std::string& value) { o << key << " = " << value << "\n"; };
  kv("run.name", quoted(c.name));
  {
    std::string a = "[";
    for (std::size_t i = 0; i < c.atoms.size(); ++i)
      a += (i ? ", " : "") + list({c.atoms[i].first, c.atoms[i].second});
    kv("kernel.atoms", a + "]");
  }
  kv("kernel.density", quoted(c.density));
  kv("kernel.cutoff", num(c.cutoff));
  kv("nonlinearity.family", quoted(c.family));
  kv("nonlinearity.beta", num(c.beta));
  kv("nonlinearity.f", quoted(c.f_expr));
  kv("nonlinearity.phi", quoted(c.phi_expr));
  kv("forcing.kind", quoted(c.forcing_kind));
  kv("forcing.name", quoted(c.forcing_name));
  kv("forcing.params", list(c.forcing_params));
  kv("forcing.target", quoted(c.forcing_target));
  kv("forcing.expr", quoted(c.forcing_expr));
  kv("noise.kind", quoted(c.noise_kind));
  kv("noise.sigma", quoted(c.sigma));
  kv("noise.alpha", num(c.alpha));
  kv("noise.scale", num(c.scale));
  kv("noise.skew", num(c.skew));
  kv("noise.seed", std::to_string(c.seed));
  kv("noise.paths", std::to_string(c.paths));
  kv("grid.T", num(c.T));
  kv("grid.dt", num(c.dt));
  if (c.psi) kv("initial.psi", num(*c.psi));
  kv("output.snapshots", std::to_string(c.snapshots));
  kv("analysis.mode", quoted(c.mode));
  kv("analysis.L", quoted(c.L));
  kv("analysis.L_horizon", num(c.L_horizon));
  kv("analysis.envelope", quoted(c.envelope));
  kv("analysis.envelope_role", quoted(c.envelope_role));
  kv("analysis.tolerance", num(c.tolerance));
  kv("analysis.lil_tolerance", num(c.lil_tolerance));
  kv("analysis.required_fraction", num(c.required_fraction));
  kv("convergence.levels", std::to_string(c.levels));
  for (const auto& [metric, band] : c.assertions)
    kv(("assert." + metric).c_str(), list({band.first, band.second}));
  return o.str();
}

}  // namespace volterra
