#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>

#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"
#include "tiedown/core/test_function.hpp"

namespace tiedown::lab {

inline constexpr std::array<std::string_view, 13> kKinds = {
    "dist",         "lemma22",      "equidist",           "renewal-srt", "renewal-tied",
    "renewal-llt",  "renewal-nagaev", "renewal-continuous", "map-tail",    "map-density",
    "map-dk",       "map-tied",     "walk-bridge"};

inline bool known_kind(std::string_view k) { return std::find(kKinds.begin(), kKinds.end(), k) != kKinds.end(); }

struct ExperimentConfig {
  std::string kind = "dist";
  double gamma = 0.5;
  std::int64_t p = 1;
  std::int64_t xi = 1;
  std::int64_t n = 10000;
  std::int64_t bins = 512;
  std::int64_t trials = 100000;
  std::uint64_t seed = 1;
  std::string g = "const";
  std::string map = "T";    // T or R
  std::int64_t kappa = 2;   // R map only
  std::int64_t mc_n = 200;  // walk-bridge Monte Carlo horizon
  std::string out = "lab-out";

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw UsageError("config: '" + key + "' expects a number, got '" + value + "'");
  return v;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// One `key=value` per line in a fixed key order.
inline std::string serialize(const ExperimentConfig& c) {
  std::ostringstream s;
  s << "kind=" << c.kind << '\n'
    << "gamma=" << detail::shortest(c.gamma) << '\n'
    << "p=" << c.p << '\n'
    << "xi=" << c.xi << '\n'
    << "n=" << c.n << '\n'
    << "bins=" << c.bins << '\n'
    << "trials=" << c.trials << '\n'
    << "seed=" << c.seed << '\n'
    << "g=" << c.g << '\n'
    << "map=" << c.map << '\n'
    << "kappa=" << c.kappa << '\n'
    << "mc_n=" << c.mc_n << '\n'
    << "out=" << c.out << '\n';
  return s.str();
}

inline void set_field(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "kind") c.kind = value;
  else if (key == "gamma") c.gamma = parse_number<double>(key, value);
  else if (key == "p") c.p = parse_number<std::int64_t>(key, value);
  else if (key == "xi") c.xi = parse_number<std::int64_t>(key, value);
  else if (key == "n") c.n = parse_number<std::int64_t>(key, value);
  else if (key == "bins") c.bins = parse_number<std::int64_t>(key, value);
  else if (key == "trials") c.trials = parse_number<std::int64_t>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "g") c.g = value;
  else if (key == "map") c.map = value;
  else if (key == "kappa") c.kappa = parse_number<std::int64_t>(key, value);
  else if (key == "mc_n") c.mc_n = parse_number<std::int64_t>(key, value);
  else if (key == "out") c.out = value;
  else throw UsageError("config: unknown key '" + key + "'");
}

/// Blank lines and lines starting with '#' are skipped; missing keys keep
/// their defaults.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    set_field(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return c;
}

/// Checks every parameter the selected kind reads against the owning
/// operation's preconditions; throws UsageError naming the first violation.
inline void validate(const ExperimentConfig& c) {
  auto fail = [&](const std::string& what) { throw UsageError(c.kind + ": " + what); };
  if (!known_kind(c.kind)) throw UsageError("unknown experiment kind '" + c.kind + "'");
  const bool map_kind = c.kind.rfind("map-", 0) == 0;
  const bool walk_kind = c.kind == "walk-bridge";
  if (!walk_kind) {
    if (map_kind) {
      if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("gamma must lie in (0,1]");
      if (c.kind == "map-tied" && !(c.gamma < 1.0)) fail("gamma must lie in (0,1)");
    } else if (!(c.gamma > 0.0 && c.gamma < 1.0)) {
      fail("gamma must lie in (0,1)");
    }
  }
  if (c.p < 1) fail("p must be a positive integer");
  if (gcd64(c.xi, c.p) != 1) fail("xi must be coprime to p");
  if (c.n < 1) fail("n must be positive");
  if (c.trials < 1) fail("trials must be positive");
  if (c.bins < 16) fail("bins must be at least 16");
  if (c.map != "T" && c.map != "R") fail("map must be T or R");
  if (c.map == "R" && c.kappa < 2) fail("kappa must be an integer >= 2");
  if (c.out.empty()) fail("out must name a directory");
  (void)g_from_name(c.g);
  if (walk_kind) {
    if (c.n > 2000) fail("n must be at most 2000 (state-space bound)");
    if (c.mc_n < 1) fail("mc_n must be positive");
    if (c.trials < 10000) fail("trials must be at least 1e4");
  }
  if ((c.kind == "map-dk" || c.kind == "map-tail") && c.trials < 1000) fail("trials must be at least 1000");
  if (c.kind == "map-tied" && c.trials < 10000) fail("trials must be at least 1e4");
}

}  // namespace tiedown::lab
