#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mlab/errors.hpp"

namespace mlab::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

const KeySpec* lookup(const Schema& schema, const std::string& key) {
  if (auto it = schema.find(key); it != schema.end()) return &it->second;
  for (const auto& [k, spec] : schema) {
    if (k.size() > 2 && k.ends_with(".*") && key.size() > k.size() - 1 && key.starts_with(k.substr(0, k.size() - 1))) {
      return &spec;
    }
  }
  return nullptr;
}

void check_value(const std::string& key, const KeySpec& spec, const std::string& value) {
  switch (spec.kind) {
    case Kind::text:
      if (value.empty()) throw ValidationError("empty value for " + key);
      break;
    case Kind::real:
      parse_real(value);
      break;
    case Kind::integer:
      parse_integer(value);
      break;
    case Kind::real_list:
      for (const auto& item : split_list(value)) parse_real(item);
      break;
    case Kind::text_list:
      if (split_list(value).empty()) throw ValidationError("empty list for " + key);
      break;
  }
}

const Schema& common() {
  static const Schema s{
      {"potential", {Kind::text, "catalog potential name"}},
      {"potential.*", {Kind::real, "catalog parameter, e.g. potential.tau"}},
      {"seed", {Kind::integer, "base RNG seed"}},
      {"threads", {Kind::integer, "worker threads"}},
  };
  return s;
}

}  // namespace

double parse_real(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ValidationError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

long parse_integer(std::string_view s) {
  s = trim(s);
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ValidationError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t b = 0;
  while (b <= s.size()) {
    auto e = s.find(',', b);
    if (e == std::string_view::npos) e = s.size();
    const auto item = trim(s.substr(b, e - b));
    if (item.empty()) throw ValidationError("empty list element in '" + std::string(s) + "'");
    out.emplace_back(item);
    b = e + 1;
  }
  return out;
}

Schema schema_for(const std::string& command) {
  Schema s = common();
  auto add = [&](std::string k, Kind kind, std::string doc) { s[std::move(k)] = {kind, std::move(doc)}; };
  if (command == "morse") {
    add("resolution", Kind::integer, "sublevel raster points per axis");
    add("seeds_per_axis", Kind::integer, "Newton seeds per axis");
  } else if (command == "rates") {
    add("s", Kind::real_list, "step sizes");
    add("alpha", Kind::real_list, "momentum coefficients");
    add("regime", Kind::text_list, "underdamped_hp, overdamped_lr, nag_sc");
  } else if (command == "simulate") {
    add("s", Kind::real_list, "step sizes");
    add("alpha", Kind::real_list, "momentum coefficients");
    add("scheme", Kind::text_list, "sgd, sgdm, nag_sc, nag_c, sde_underdamped, sde_overdamped");
    add("n_traj", Kind::integer, "trajectories per grid point");
    add("n_steps", Kind::integer, "steps per trajectory");
    add("dt", Kind::real, "SDE time step (default: curvature cap)");
    add("x0", Kind::real_list, "initial position");
    add("v0", Kind::real_list, "initial velocity");
    add("record_every", Kind::integer, "record stride");
    add("position_init", Kind::text, "fixed or gibbs");
    add("velocity_init", Kind::text, "fixed or gibbs");
    add("noise", Kind::real, "noise multiplier");
    add("t_min", Kind::real, "decay fit start time");
  } else if (command == "spectral") {
    add("s", Kind::real_list, "step sizes");
    add("alpha", Kind::real_list, "momentum coefficients");
    add("nx", Kind::integer, "position grid points");
    add("nv", Kind::integer, "velocity grid points");
    add("k", Kind::integer, "eigenvalues requested");
    add("tol", Kind::real, "residual tolerance");
    add("depth", Kind::real, "box depth in units of beta");
    add("transport", Kind::text, "upwind1 or upwind2");
    add("export_matrix", Kind::integer, "1 writes each operator as COO text");
  } else if (command == "certify") {
    add("s", Kind::real, "step size");
    add("alpha", Kind::real, "momentum coefficient");
    add("nx", Kind::integer, "position grid points");
    add("nv", Kind::integer, "velocity grid points");
    add("villani_C", Kind::real, "relative Hessian bound (default: estimated)");
    add("lattice", Kind::integer, "search points per axis");
    add("compare_gap", Kind::integer, "1 also solves for the Kramers gap");
  } else if (command == "reproduce") {
    add("s", Kind::real_list, "ratio_demo step sizes");
    add("alpha", Kind::real_list, "ratio_demo momentum coefficients");
    add("barrier", Kind::real, "ratio_demo barrier height");
  } else {
    throw UsageError("unknown command '" + command + "'");
  }
  return s;
}

Config Config::parse(std::string_view text, const Schema& schema, const std::string& origin) {
  Config c;
  c.schema_ = schema;
  std::size_t lineno = 0, b = 0;
  while (b < text.size()) {
    auto e = text.find('\n', b);
    if (e == std::string_view::npos) e = text.size();
    ++lineno;
    const auto line = trim(text.substr(b, e - b));
    b = e + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const KeySpec* spec = lookup(schema, key);
    if (!spec) throw ValidationError(where + ": unknown key '" + key + "'");
    if (c.raw_.count(key)) throw ValidationError(where + ": duplicate key '" + key + "'");
    try {
      check_value(key, *spec, value);
    } catch (const ValidationError& err) {
      throw ValidationError(where + ": " + key + ": " + err.what());
    }
    c.raw_[key] = value;
  }
  return c;
}

Config Config::load(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), schema, path);
}

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = lookup(schema_, key);
  if (!spec) throw ValidationError("unknown key '" + key + "'");
  check_value(key, *spec, value);
  raw_[key] = value;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  auto it = raw_.find(key);
  return it == raw_.end() ? fallback : it->second;
}

double Config::real(const std::string& key, double fallback) const {
  auto it = raw_.find(key);
  return it == raw_.end() ? fallback : parse_real(it->second);
}

long Config::integer(const std::string& key, long fallback) const {
  auto it = raw_.find(key);
  return it == raw_.end() ? fallback : parse_integer(it->second);
}

std::vector<double> Config::reals(const std::string& key, const std::vector<double>& fallback) const {
  auto it = raw_.find(key);
  if (it == raw_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) out.push_back(parse_real(item));
  return out;
}

std::vector<std::string> Config::texts(const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = raw_.find(key);
  return it == raw_.end() ? fallback : split_list(it->second);
}

std::map<std::string, double> Config::prefixed(const std::string& prefix) const {
  std::map<std::string, double> out;
  for (const auto& [k, v] : raw_) {
    if (k.starts_with(prefix)) out[k.substr(prefix.size())] = parse_real(v);
  }
  return out;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : raw_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace mlab::cli
