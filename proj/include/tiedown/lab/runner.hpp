#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "tiedown/core/io.hpp"
#include "tiedown/interval_maps.hpp"
#include "tiedown/lab/config.hpp"
#include "tiedown/lab/export.hpp"
#include "tiedown/lab/verdict.hpp"
#include "tiedown/renewal_lab.hpp"
#include "tiedown/rv_asymptotics.hpp"
#include "tiedown/rw_skew.hpp"
#include "tiedown/stable_laws.hpp"

namespace tiedown::lab {

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto t = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(t - t0_).count();
    t0_ = t;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

struct RunResult {
  std::string id;
  std::vector<Verdict> verdicts;
  std::filesystem::path dir;
};

namespace detail {

inline void stamp(std::vector<Verdict>& vs, std::size_t from, double seconds) {
  for (std::size_t i = from; i < vs.size(); ++i) vs[i].runtime = seconds;
}

inline MapSpec map_of(const ExperimentConfig& c) {
  return c.map == "R" ? MapSpec::R(c.gamma, static_cast<int>(c.kappa)) : MapSpec::T(c.gamma);
}

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> x(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) x[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, i / double(points - 1));
  return x;
}

inline std::vector<Verdict> run_dist(const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::vector<Verdict> out;
  Stopwatch sw;
  const StableFamily fam(c.gamma);
  const auto [lo, hi] = fam.overlap_window();
  double gap = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double x = lo * std::pow(hi / lo, i / 40.0);
    gap = std::max(gap, std::abs(stable_density_series(fam, x) - stable_density_inversion(fam, x)));
  }
  out.push_back(make_verdict("overlap_sup_gap", gap, 1e-8, 0.0, Mode::kUpperBound));
  out.push_back(make_verdict("ml_mean", tied_down_expect(fam, g_const(1.0)), 1.0, 1e-8));
  out.push_back(make_verdict("tied_mean_vs_ml_moment2", tied_down_expect(fam, g_identity()), ml_moment(fam, 2), 1e-8));
  if (c.gamma == 0.5) {
    double ez = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = 0.05 + i * (20.0 - 0.05) / 2000.0;
      ez = std::max(ez, std::abs(stable_density(fam, x) - std::pow(x, -1.5) * std::exp(-1.0 / (kPi * x)) / kPi));
    }
    double ey = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double y = i * 5.0 / 2000.0;
      ey = std::max(ey, std::abs((y == 0.0 ? ml_density_at_zero(fam) : ml_density(fam, y)) - 2.0 / kPi * std::exp(-y * y / kPi)));
    }
    out.push_back(make_verdict("levy_sup_error", ez, 1e-6, 0.0, Mode::kUpperBound));
    out.push_back(make_verdict("half_normal_sup_error", ey, 1e-6, 0.0, Mode::kUpperBound));
  }
  stamp(out, 0, sw.lap());
  const std::size_t first_mc = out.size();
  const auto z = sample_stable(fam, c.seed, static_cast<std::size_t>(c.trials));
  for (int k = 1; k <= 3; ++k) {
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = std::pow(z[i], -c.gamma * k);
    const MeanStderr ms = mean_stderr(y);
    out.push_back(make_verdict("mc_moment_" + std::to_string(k), ms.mean, ml_moment(fam, k), 4.0 * ms.stderr_,
                               Mode::kTwoSided, c.seed));
  }
  stamp(out, first_mc, sw.lap());
  const auto xs = log_grid(0.02, 50.0, 200);
  std::vector<double> fz;
  for (double x : xs) fz.push_back(stable_density(fam, x));
  export_profile(xs, fz, dir, "stable_density", run_metadata(c.gamma, 200, 0, c.seed));
  std::vector<double> ys;
  std::vector<double> fy;
  for (int i = 0; i <= 200; ++i) {
    ys.push_back(i * 0.025);
    fy.push_back(i == 0 ? ml_density_at_zero(fam) : ml_density(fam, ys.back()));
  }
  export_profile(ys, fy, dir, "ml_density", run_metadata(c.gamma, 201, 0, c.seed));
  return out;
}

inline std::vector<Verdict> run_lemma22(const ExperimentConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  const StableFamily fam(c.gamma);
  const RegVarying a(c.gamma, 1.0);
  const double lo = 0.05;
  const double hi = 40.0;
  const LogDensityTable T(fam, lo, hi);
  const TestFunction g = g_from_name(c.g);
  const ResidueWindow w{0.0, 1.0};
  const double limit = lemma22_limit(fam, g, lo, hi, w.lattice_length());
  CsvTable csv;
  csv.header = {"n", "sum", "limit"};
  Lemma22Result last;
  for (std::int64_t m = 1000; m <= c.n; m *= 10) {
    last = lemma22_sum(a, c.p, c.xi, w, g, T, m);
    csv.rows.push_back({double(m), last.value, limit});
  }
  if (csv.rows.empty() || csv.rows.back()[0] != double(c.n)) {
    last = lemma22_sum(a, c.p, c.xi, w, g, T, c.n);
    csv.rows.push_back({double(c.n), last.value, limit});
  }
  ensure_directory(dir);
  write_csv(dir / "lemma22.csv", csv);
  std::vector<Verdict> out;
  out.push_back(make_verdict("window_nonempty", last.empty_window ? 0.0 : 1.0, 1.0, 0.0));
  const double tol = c.p == 1 ? 0.02 : 0.03;
  out.push_back(make_verdict("sum_over_limit", last.value / limit, 1.0, tol));
  stamp(out, 0, sw.lap());
  return out;
}

inline std::vector<Verdict> run_equidist(const ExperimentConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  const double xi = std::sqrt(2.0) * static_cast<double>(c.xi);
  const double p = static_cast<double>(c.p);
  const RegVarying a(c.gamma, 1.0);
  std::vector<double> flat(static_cast<std::size_t>(c.n), 1.0 / static_cast<double>(c.n));
  std::vector<double> rv(static_cast<std::size_t>(c.n));
  for (std::int64_t k = 1; k <= c.n; ++k) rv[static_cast<std::size_t>(k - 1)] = u_rate(a, k);
  const auto e1 = equidist_average(flat, xi, p, 0.0, 0.5 * p, 0.0);
  const auto e2 = equidist_average(rv, xi, p, 0.0, 0.5 * p, 0.0);
  CsvTable csv;
  csv.header = {"weights", "value", "companion", "variation"};
  csv.rows.push_back({0.0, e1.value, e1.companion, e1.variation});
  csv.rows.push_back({1.0, e2.value, e2.companion, e2.variation});
  ensure_directory(dir);
  write_csv(dir / "equidist.csv", csv);
  std::vector<Verdict> out;
  out.push_back(make_verdict("flat_weights_ratio", e1.value / e1.companion, 1.0, 0.01));
  out.push_back(make_verdict("u_weights_ratio", e2.value / e2.companion, 1.0, 0.01));
  stamp(out, 0, sw.lap());
  return out;
}

inline std::vector<Verdict> run_renewal_table(const ExperimentConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  const LatticeLaw law(c.gamma, c.p, c.xi);
  const RegVarying a = law.return_sequence();
  const ConvolutionTable table(law, c.n, c.n);
  std::vector<Verdict> out;
  ensure_directory(dir);
  if (c.kind == "renewal-srt") {
    CsvTable csv;
    csv.header = {"n", "ratio", "reachable"};
    for (double m : log_grid(10.0, double(c.n), 40)) {
      const auto mi = static_cast<std::int64_t>(std::llround(m));
      const SrtResult r = srt_profile(table, a, mi);
      csv.rows.push_back({double(mi), r.ratio, r.unreachable ? 0.0 : 1.0});
    }
    write_csv(dir / "srt.csv", csv);
    const SrtResult r = srt_profile(table, a, c.n);
    if (r.unreachable)
      out.push_back(make_verdict("srt_ratio_unreachable", r.tied_sum, 0.0, 0.0));
    else
      out.push_back(make_verdict("srt_ratio", r.ratio, 1.0, 0.1));
  } else {
    const StableFamily fam(c.gamma);
    const TestFunction g = g_from_name(c.g);
    const double target = g.is_constant() ? g.constant_value() : tied_down_expect(fam, g);
    const auto sums = tied_sums_from_table(table, a, c.n, g);
    CsvTable csv;
    csv.header = {"n", "normalized"};
    for (double m : log_grid(10.0, double(c.n), 40)) {
      const auto mi = static_cast<std::int64_t>(std::llround(m));
      csv.rows.push_back({double(mi), sums[static_cast<std::size_t>(mi - 1)] / u_rate(a, mi)});
    }
    write_csv(dir / "tied.csv", csv);
    const TiedResult t = tied_down_functional(table, a, c.n, g);
    if (t.unreachable)
      out.push_back(make_verdict("tied_unreachable", t.value, 0.0, 0.0));
    else
      out.push_back(make_verdict("tied_over_target", t.value / target, 1.0, 0.1));
    out.push_back(make_verdict("cesaro_deviation", cesaro_deviation_from_sums(law, a, sums, target), 0.0, 0.0,
                               Mode::kInformational));
  }
  stamp(out, 0, sw.lap());
  return out;
}

inline std::vector<Verdict> run_llt(const ExperimentConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  const LatticeLaw law(c.gamma, c.p, c.xi);
  const RegVarying a = law.return_sequence();
  const StableFamily fam(c.gamma);
  const auto prof = periodic_llt_profile_spectral(law, fam, a, c.n, {0.5, 3.0}, 1000);
  CsvTable csv;
  csv.header = {"k", "kappa", "lhs", "rhs", "reachable"};
  double worst = 0.0;
  double zero_branch = 0.0;
  double fmax = 0.0;
  for (const auto& pt : prof) {
    csv.rows.push_back({double(pt.k), pt.kappa, pt.lhs, pt.rhs, pt.reachable ? 1.0 : 0.0});
    if (pt.reachable) {
      worst = std::max(worst, std::abs(pt.lhs - pt.rhs));
      fmax = std::max(fmax, pt.rhs);
    } else {
      zero_branch = std::max(zero_branch, std::abs(pt.lhs));
    }
  }
  ensure_directory(dir);
  write_csv(dir / "llt.csv", csv);
  std::vector<Verdict> out;
  out.push_back(make_verdict("zero_branch_max", zero_branch, 0.0, 0.0));
  out.push_back(make_verdict("relative_max_deviation", fmax > 0.0 ? worst / fmax : INFINITY, 0.05, 0.0,
                             Mode::kUpperBound));
  stamp(out, 0, sw.lap());
  return out;
}

inline std::vector<Verdict> run_nagaev(const ExperimentConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  const LatticeLaw law(c.gamma, c.p, c.xi);
  const StableFamily fam(c.gamma);
  CsvTable csv;
  csv.header = {"t", "lhs_re", "lhs_im", "rhs_re", "rhs_im"};
  std::vector<Verdict> out;
  for (double t : {0.5, 1.0}) {
    const NagaevResult r = nagaev_check(law, fam, t, c.n);
    csv.rows.push_back({t, r.lhs.real(), r.lhs.imag(), r.rhs.real(), r.rhs.imag()});
    out.push_back(make_verdict(t == 0.5 ? "gap_t0.5" : "gap_t1", std::abs(r.lhs - r.rhs), 0.02, 0.0,
                               Mode::kUpperBound));
  }
  ensure_directory(dir);
  write_csv(dir / "nagaev.csv", csv);
  stamp(out, 0, sw.lap());
  return out;
}

inline std::vector<Verdict> run_continuous(const ExperimentConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  const ContinuousLaw law(c.gamma, 1.0);
  const RegVarying a = law.return_sequence();
  const StableFamily fam(c.gamma);
  const TestFunction g = g_from_name(c.g);
  const double len = 0.5;
  const double target = len * (g.is_constant() ? g.constant_value() : tied_down_expect(fam, g));
  const McEstimate e =
      mc_tied_down_continuous(law, a, double(c.n), {0.0, len}, g, static_cast<std::size_t>(c.trials), c.seed);
  CsvTable csv;
  csv.header = {"n", "estimate", "stderr", "target"};
  csv.rows.push_back({double(c.n), e.estimate, e.stderr_, target});
  ensure_directory(dir);
  write_csv(dir / "continuous.csv", csv);
  std::vector<Verdict> out;
  out.push_back(make_verdict("continuous_estimate", e.estimate, target, 3.0 * e.stderr_, Mode::kTwoSided, c.seed));
  stamp(out, 0, sw.lap());
  return out;
}

inline std::vector<Verdict> run_map(const ExperimentConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  const MapSpec spec = map_of(c);
  std::vector<Verdict> out;
  if (c.kind == "map-tail") {
    const ReturnTail tail = return_tail(spec, static_cast<std::size_t>(c.trials), c.seed);
    std::vector<double> t;
    std::vector<double> s;
    for (const auto& pt : tail.points) {
      t.push_back(pt.t);
      s.push_back(pt.survival);
    }
    export_profile(t, s, dir, "return_tail", run_metadata(c.gamma, 0, 0, c.seed));
    out.push_back(make_verdict("tail_slope", tail.slope, -c.gamma, 0.05, Mode::kTwoSided, c.seed));
    if (spec.is_T() && c.gamma == 0.5) {
      std::uint64_t missing = 0;
      for (auto v : tail.small_counts) missing += (v == 0);
      out.push_back(make_verdict("unobserved_small_returns", double(missing), 0.0, 0.0, Mode::kTwoSided, c.seed));
    }
  } else if (c.kind == "map-density") {
    const int per_octave = std::max<int>(2, static_cast<int>(c.bins / 16));
    const int iters = 10;
    const DensityProfile d = infinite_density_profile(spec, per_octave, iters);
    export_profile(d.x, d.h, dir, "invariant_density", run_metadata(c.gamma, c.bins, iters, c.seed));
    out.push_back(make_verdict("density_exponent", d.exponent, -1.0 / c.gamma, 0.1));
    out.push_back(make_verdict("stabilization", d.stabilization, 1e-4, 0.0, Mode::kUpperBound));
    stamp(out, 0, sw.lap());
    if (spec.is_T()) {
      const std::size_t from = out.size();
      const UlamMatrix U = ulam_matrix(spec, static_cast<int>(c.bins));
      const Eigen::VectorXd fv = ulam_fixed_vector(U);
      const auto moduli = ulam_leading_moduli(U);
      out.push_back(make_verdict("ulam_second_modulus", moduli.second, 1.0, 0.0, Mode::kUpperBound));
      out.push_back(make_verdict("ulam_fixed_min", -fv.minCoeff(), 0.0, 0.0, Mode::kUpperBound));
      out.push_back(make_verdict("ulam_nonreturn_rate", U.nonreturn_rate, 1e-6, 0.0, Mode::kInformational));
      out.push_back(make_verdict("ulam_invariance_tv", ulam_invariance_tv(spec, U, fv, 1000, c.seed), 1e-3, 0.0,
                                 Mode::kUpperBound, c.seed));
      if (c.gamma < 1.0) {
        const KacTrend k = kac_partial_means(spec, U, fv, static_cast<std::size_t>(c.trials), c.seed);
        out.push_back(make_verdict("kac_exponent", k.exponent, 1.0 - c.gamma, 0.1 * (1.0 - c.gamma),
                                   Mode::kTwoSided, c.seed));
      }
      stamp(out, from, sw.lap());
    }
    return out;
  } else if (c.kind == "map-dk") {
    const DarlingKacResult dk =
        darling_kac_empirical(spec, static_cast<std::uint64_t>(c.n), static_cast<std::size_t>(c.trials), c.seed);
    const auto [x, h] = histogram(dk.normalized, 5.0, 100);
    export_profile(x, h, dir, "darling_kac_histogram", run_metadata(c.gamma, 100, c.n, c.seed));
    out.push_back(make_verdict("ks_distance", dk.ks_distance, 0.05, 0.0, Mode::kUpperBound, c.seed));
    const StableFamily fam(c.gamma);
    out.push_back(make_verdict("second_moment_ratio", dk.second_moment / ml_moment(fam, 2), 1.0, 0.05,
                               Mode::kTwoSided, c.seed));
  } else {
    const TestFunction g = g_from_name(c.g);
    std::vector<std::int64_t> checkpoints;
    if (c.n >= 10) checkpoints.push_back(c.n / 10);
    checkpoints.push_back(c.n);
    const MapTiedReport r = map_tied_down_estimate(spec, c.n, static_cast<std::size_t>(c.trials), g, c.seed, checkpoints);
    CsvTable csv;
    csv.header = {"N", "deviation"};
    for (std::size_t i = 0; i < r.checkpoints.size(); ++i) csv.rows.push_back({double(r.checkpoints[i]), r.deviation[i]});
    ensure_directory(dir);
    write_csv(dir / "map_tied.csv", csv);
    const double dn = r.deviation.back();
    out.push_back(make_verdict("cesaro_deviation", dn, 0.1, 0.0, Mode::kUpperBound, c.seed));
    if (r.deviation.size() == 2)
      out.push_back(make_verdict("deviation_decrease", dn - r.deviation.front(), 0.0, 0.0, Mode::kUpperBound, c.seed));
  }
  stamp(out, 0, sw.lap());
  return out;
}

inline std::vector<Verdict> run_walk(const ExperimentConfig& c, const std::filesystem::path& dir) {
  Stopwatch sw;
  const WalkLaw law;
  const StableFamily half(0.5);
  std::vector<Verdict> out;
  const auto pmf = bridge_local_time_exact(law, c.n);
  const double ah = local_time_mean(law, c.n);
  double m1 = 0.0;
  double m2 = 0.0;
  {
    CompensatedSum s1;
    CompensatedSum s2;
    for (std::size_t l = 0; l < pmf.size(); ++l) {
      const double r = static_cast<double>(l) / ah;
      s1.add(pmf[l] * r);
      s2.add(pmf[l] * r * r);
    }
    m1 = s1.value();
    m2 = s2.value();
  }
  CsvTable exact;
  exact.header = {"l", "prob"};
  for (std::size_t l = 0; l < pmf.size(); ++l) exact.rows.push_back({double(l), pmf[l]});
  ensure_directory(dir);
  write_csv(dir / "bridge_exact.csv", exact);
  out.push_back(make_verdict("size_bias_ratio", m1 / ml_moment(half, 2), 1.0, 0.05));
  out.push_back(make_verdict("second_moment_ratio", m2 / ml_moment(half, 3), 1.0, 0.08));
  stamp(out, 0, sw.lap());
  const std::size_t from = out.size();
  const auto ref = bridge_local_time_exact(law, c.mc_n);
  const BridgeMc mc = bridge_local_time_mc(law, c.mc_n, static_cast<std::uint64_t>(c.trials), c.seed);
  CsvTable emp;
  emp.header = {"l", "exact", "mc"};
  for (std::size_t l = 0; l < ref.size(); ++l) emp.rows.push_back({double(l), ref[l], mc.pmf[l]});
  write_csv(dir / "bridge_mc.csv", emp);
  out.push_back(make_verdict("mc_total_variation", total_variation(mc.pmf, ref), 0.01, 0.0, Mode::kUpperBound, c.seed));
  out.push_back(make_verdict("mc_acceptance_rate", mc.acceptance_rate, 0.0, 0.0, Mode::kInformational, c.seed));
  stamp(out, from, sw.lap());
  return out;
}

}  // namespace detail

/// Validates, dispatches and writes the data files under out/<kind>/.
inline RunResult run_experiment(const ExperimentConfig& c) {
  validate(c);
  RunResult r;
  r.id = c.kind;
  r.dir = std::filesystem::path(c.out) / c.kind;
  ensure_directory(r.dir);
  write_text(r.dir / "config.txt", serialize(c));
  const std::string& k = c.kind;
  if (k == "dist") r.verdicts = detail::run_dist(c, r.dir);
  else if (k == "lemma22") r.verdicts = detail::run_lemma22(c, r.dir);
  else if (k == "equidist") r.verdicts = detail::run_equidist(c, r.dir);
  else if (k == "renewal-srt" || k == "renewal-tied") r.verdicts = detail::run_renewal_table(c, r.dir);
  else if (k == "renewal-llt") r.verdicts = detail::run_llt(c, r.dir);
  else if (k == "renewal-nagaev") r.verdicts = detail::run_nagaev(c, r.dir);
  else if (k == "renewal-continuous") r.verdicts = detail::run_continuous(c, r.dir);
  else if (k.rfind("map-", 0) == 0) r.verdicts = detail::run_map(c, r.dir);
  else r.verdicts = detail::run_walk(c, r.dir);
  return r;
}

}  // namespace tiedown::lab
