#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tiedown/core/io.hpp"

namespace tiedown::lab {

enum class Mode {
  kTwoSided,      // |observed − target| ≤ tolerance
  kUpperBound,    // observed ≤ target
  kInformational  // recorded, never fails
};

struct Verdict {
  std::string metric;
  double observed = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  Mode mode = Mode::kTwoSided;
  bool pass = false;
  double runtime = 0.0;  // seconds
  std::optional<std::uint64_t> seed;
};

inline bool judge(Mode mode, double observed, double target, double tolerance) {
  switch (mode) {
    case Mode::kTwoSided: return std::abs(observed - target) <= tolerance;
    case Mode::kUpperBound: return observed <= target;
    case Mode::kInformational: return true;
  }
  return false;
}

inline Verdict make_verdict(std::string metric, double observed, double target, double tolerance,
                            Mode mode = Mode::kTwoSided, std::optional<std::uint64_t> seed = std::nullopt) {
  Verdict v;
  v.metric = std::move(metric);
  v.observed = observed;
  v.target = target;
  v.tolerance = tolerance;
  v.mode = mode;
  v.seed = seed;
  v.pass = std::isfinite(observed) && judge(mode, observed, target, tolerance);
  return v;
}

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::kTwoSided: return "two-sided";
    case Mode::kUpperBound: return "upper-bound";
    case Mode::kInformational: return "informational";
  }
  return "?";
}

inline bool all_pass(const std::vector<Verdict>& vs) {
  for (const auto& v : vs)
    if (!v.pass) return false;
  return true;
}

/// Verdicts keyed by experiment id.
using VerdictMap = std::map<std::string, std::vector<Verdict>>;

/// Runtimes are left out so two runs of the same configuration produce the
/// same bytes; see timings_json.
inline Json report_json(const VerdictMap& all) {
  Json doc = Json::object();
  for (const auto& [id, vs] : all) {
    Json arr = Json::array();
    for (const auto& v : vs) {
      Json e = Json::object();
      e["metric"] = v.metric;
      e["observed"] = v.observed;
      e["target"] = v.target;
      e["tolerance"] = v.tolerance;
      e["mode"] = mode_name(v.mode);
      e["pass"] = v.pass;
      if (v.seed) e["seed"] = *v.seed;
      arr.push_back(std::move(e));
    }
    doc[id] = std::move(arr);
  }
  return doc;
}

inline Json timings_json(const VerdictMap& all) {
  Json doc = Json::object();
  for (const auto& [id, vs] : all) {
    Json e = Json::object();
    for (const auto& v : vs) e[v.metric] = v.runtime;
    doc[id] = std::move(e);
  }
  return doc;
}

/// Writes report.json, and timings.json next to it.
inline void emit_report(const VerdictMap& all, const std::filesystem::path& dir) {
  ensure_directory(dir);
  write_json(dir / "report.json", report_json(all));
  write_json(dir / "timings.json", timings_json(all));
}

}  // namespace tiedown::lab
