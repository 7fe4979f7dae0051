#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"
#include "tiedown/core/random.hpp"
#include "tiedown/core/test_function.hpp"
#include "tiedown/stable_laws.hpp"

namespace tiedown {

enum class MapFamily { kT, kR };

/// T_γ:  x(1 + (2x)^{1/γ}) on [0,1/2),  2x − 1 on [1/2,1].
/// R_γ:  x(1 + (κx)^{1/γ}) mod 1.
/// Both are induced on Ω = [1/2, 1].
class MapSpec {
 public:
  static MapSpec T(double gamma) { return MapSpec(MapFamily::kT, gamma, 2); }
  static MapSpec R(double gamma, int kappa) { return MapSpec(MapFamily::kR, gamma, kappa); }

  MapFamily family() const noexcept { return family_; }
  double gamma() const noexcept { return gamma_; }
  int kappa() const noexcept { return kappa_; }
  double alpha() const noexcept { return alpha_; }
  /// Point of the slow branch mapped to 1/2; orbits below it stay below 1/2.
  double slow_exit() const noexcept { return x_star_; }
  bool is_T() const noexcept { return family_ == MapFamily::kT; }

  /// x(1 + (κx)^α), the increasing slow branch before reduction mod 1.
  double lift(double x) const {
    if (x < 0x1.0p-30) {
      const long double lx = x;
      return static_cast<double>(lx + lx * std::pow(static_cast<long double>(kappa_) * lx,
                                                    static_cast<long double>(alpha_)));
    }
    if (alpha2_) {
      const double kx = kappa_ * x;
      return x + x * kx * kx;
    }
    return x + x * std::pow(kappa_ * x, alpha_);
  }

  /// Solves lift(x) = y for y ≥ 0.
  double lift_inverse(double y) const {
    if (y <= 0.0) return 0.0;
    // start from whichever of the two regimes dominates
    double x = std::min(y, std::pow(y / std::pow(static_cast<double>(kappa_), alpha_), 1.0 / (alpha_ + 1.0)));
    double lo = 0.0;
    double hi = y;
    for (int it = 0; it < 200; ++it) {
      const double f = lift(x) - y;
      if (f > 0.0) hi = std::min(hi, x); else lo = std::max(lo, x);
      const double df = 1.0 + (alpha_ + 1.0) * std::pow(kappa_ * x, alpha_);
      double nx = x - f / df;
      if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
      if (std::abs(nx - x) <= 1e-17 * x || hi - lo <= 1e-17 * hi) {
        x = nx;
        break;
      }
      x = nx;
    }
    return x;
  }

  double step(double x) const {
    if (is_T()) return x < 0.5 ? lift(x) : 2.0 * x - 1.0;
    const double y = lift(x);
    return y - std::floor(y);
  }

  /// Lower bound on the number of steps an orbit at x < slow_exit() needs
  /// before it can reach [1/2,1]. With y = x^{−α}, one slow step lowers y by at
  /// most ακ^α because (1+ε)^{−α} ≥ 1 − αε.
  double min_steps_to_exit(double x) const {
    if (x >= x_star_) return 1.0;
    if (x <= 0.0) return std::numeric_limits<double>::infinity();
    return (std::pow(x, -alpha_) - std::pow(x_star_, -alpha_)) / (alpha_ * std::pow(kappa_, alpha_)) + 1.0;
  }

 private:
  MapSpec(MapFamily family, double gamma, int kappa) : family_(family), gamma_(gamma), kappa_(kappa) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("MapSpec: gamma must lie in (0,1]");
    if (kappa < 2) throw DomainError("MapSpec: kappa must be at least 2");
    alpha_ = 1.0 / gamma;
    alpha2_ = (alpha_ == 2.0);
    x_star_ = lift_inverse(0.5);
    // monotonicity of each branch on a dense grid
    const int grid = 4096;
    double prev = -1.0;
    const double left_end = is_T() ? 0.5 : 1.0;
    for (int i = 0; i < grid; ++i) {
      const double x = left_end * i / grid;
      const double y = lift(x);
      if (!(y > prev)) throw DomainError("MapSpec: slow branch not increasing");
      prev = y;
    }
  }

  MapFamily family_;
  double gamma_;
  int kappa_;
  double alpha_ = 2.0;
  bool alpha2_ = false;
  double x_star_ = 0.0;
};

inline double map_step(const MapSpec& spec, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("map_step: x must lie in [0,1]");
  const double y = spec.step(x);
  if (!std::isfinite(y)) throw NumericalFailure("map_step: non-finite iterate", y);
  return y;
}

inline bool in_omega(double x) noexcept { return x >= 0.5; }

struct Excursion {
  std::uint64_t steps = 0;  // steps taken, the last one landing in Ω when returned
  double landing = 0.0;
  bool returned = false;
};

/// Iterates from x ∉ Ω until the orbit enters Ω, using at most max_steps
/// steps. Gives up early, exactly, once the exit bound exceeds the budget.
inline Excursion run_excursion(const MapSpec& spec, double x, std::uint64_t max_steps) {
  Excursion e;
  double prev = std::numeric_limits<double>::infinity();
  const double x_star = spec.slow_exit();
  while (e.steps < max_steps) {
    if (x < prev && x < x_star) {
      const double need = spec.min_steps_to_exit(x);
      if (need > static_cast<double>(max_steps - e.steps)) {
        e.steps = max_steps;
        return e;
      }
    }
    prev = x;
    x = spec.step(x);
    ++e.steps;
    if (in_omega(x)) {
      e.landing = x;
      e.returned = true;
      return e;
    }
  }
  return e;
}

struct InducedOrbit {
  double start = 0.0;
  std::uint64_t phi = 0;
  double landing = 0.0;
};

inline InducedOrbit first_return(const MapSpec& spec, double x, std::uint64_t cap = 100'000'000) {
  if (!(x >= 0.5 && x <= 1.0)) throw DomainError("first_return: x must lie in [1/2,1]");
  const double y = spec.step(x);
  if (in_omega(y)) return {x, 1, y};
  const Excursion e = run_excursion(spec, y, cap - 1);
  if (!e.returned) throw NonReturnError(cap);
  return {x, e.steps + 1, e.landing};
}

/// Return time, or nullopt when it exceeds cap.
inline std::optional<InducedOrbit> try_first_return(const MapSpec& spec, double x, std::uint64_t cap) {
  const double y = spec.step(x);
  if (in_omega(y)) return InducedOrbit{x, 1, y};
  const Excursion e = run_excursion(spec, y, cap - 1);
  if (!e.returned) return std::nullopt;
  return InducedOrbit{x, e.steps + 1, e.landing};
}

struct TailPoint {
  double t = 0.0;
  double survival = 0.0;  // P(φ > t)
};

struct ReturnTail {
  std::vector<TailPoint> points;
  double slope = 0.0;
  std::uint64_t censored = 0;
  std::vector<std::uint64_t> small_counts;  // counts of φ = 1..20
};

/// Empirical P(φ > t) for Lebesgue-uniform starts in Ω and the least-squares
/// slope of log P(φ > t) against log t over [t_lo, t_hi].
inline ReturnTail return_tail(const MapSpec& spec, std::size_t starts, std::uint64_t seed, double t_lo = 100.0,
                              double t_hi = 1e4, std::uint64_t cap = 100'000) {
  const std::size_t blocks = block_count(starts);
  std::vector<std::vector<std::uint64_t>> phis(blocks);
  for_each_block(blocks, [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    const std::size_t end = std::min(starts, (b + 1) * kBlockSize);
    auto& out = phis[b];
    out.reserve(end - b * kBlockSize);
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      const double x = 0.5 + 0.5 * uniform_open(rng);
      const auto r = try_first_return(spec, x, cap);
      out.push_back(r ? r->phi : cap + 1);
    }
  });
  std::vector<std::uint64_t> all;
  all.reserve(starts);
  for (auto& v : phis) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end());
  ReturnTail tail;
  tail.small_counts.assign(20, 0);
  for (auto v : all) {
    if (v > cap) ++tail.censored;
    if (v >= 1 && v <= 20) ++tail.small_counts[v - 1];
  }
  const double n = static_cast<double>(all.size());
  std::vector<double> lx;
  std::vector<double> ly;
  for (double lt = 0.0; lt <= std::log10(static_cast<double>(cap)) + 1e-9; lt += 0.125) {
    const double t = std::pow(10.0, lt);
    const auto above = static_cast<double>(all.end() - std::upper_bound(all.begin(), all.end(), static_cast<std::uint64_t>(t)));
    tail.points.push_back({t, above / n});
    if (t >= t_lo && t <= t_hi && above > 0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(above / n));
    }
  }
  if (lx.size() >= 2) tail.slope = fit_line(lx, ly).slope;
  return tail;
}

/// Row-stochastic discretization of the induced map on B equal bins of Ω.
struct UlamMatrix {
  int bins = 0;
  Eigen::MatrixXd matrix;
  double nonreturn_rate = 0.0;
  std::string warning;

  double bin_lo(int i) const { return 0.5 + 0.5 * i / bins; }
  double bin_width() const { return 0.5 / bins; }
  int bin_of(double x) const { return std::clamp(static_cast<int>((x - 0.5) * 2.0 * bins), 0, bins - 1); }
};

/// Entry (i,j) is the Lebesgue fraction of bin i whose first-return landing
/// lies in bin j, from stratified midpoints. Orbits still out at the cap are
/// spread like the landings of the longest observed returns.
inline UlamMatrix ulam_matrix(const MapSpec& spec, int bins, int points_per_bin = 1000,
                              std::uint64_t cap = 1'000'000) {
  if (bins < 16) throw DomainError("ulam_matrix: bins must be at least 16");
  if (points_per_bin < 1000) throw DomainError("ulam_matrix: need at least 1000 points per bin");
  UlamMatrix U;
  U.bins = bins;
  U.matrix = Eigen::MatrixXd::Zero(bins, bins);
  std::vector<std::vector<int>> landing(bins, std::vector<int>(points_per_bin, -1));
  std::vector<std::vector<std::uint64_t>> phi(bins, std::vector<std::uint64_t>(points_per_bin, 0));
  for_each_block(static_cast<std::size_t>(bins), [&](std::size_t i) {
    const double lo = U.bin_lo(static_cast<int>(i));
    for (int s = 0; s < points_per_bin; ++s) {
      const double x = lo + U.bin_width() * (s + 0.5) / points_per_bin;
      const auto r = try_first_return(spec, x, cap);
      if (r) {
        landing[i][s] = U.bin_of(r->landing);
        phi[i][s] = r->phi;
      }
    }
  });
  // landing law of long returns, used for the censored mass
  std::vector<double> long_law(bins, 0.0);
  double long_total = 0.0;
  std::uint64_t missing = 0;
  for (int i = 0; i < bins; ++i)
    for (int s = 0; s < points_per_bin; ++s) {
      if (landing[i][s] < 0) ++missing;
      else if (phi[i][s] > cap / 10) {
        long_law[landing[i][s]] += 1.0;
        long_total += 1.0;
      }
    }
  if (long_total == 0.0) {
    std::fill(long_law.begin(), long_law.end(), 1.0 / bins);
  } else {
    for (double& v : long_law) v /= long_total;
  }
  const double w = 1.0 / points_per_bin;
  for (int i = 0; i < bins; ++i) {
    for (int s = 0; s < points_per_bin; ++s) {
      if (landing[i][s] >= 0) {
        U.matrix(i, landing[i][s]) += w;
      } else {
        for (int j = 0; j < bins; ++j) U.matrix(i, j) += w * long_law[j];
      }
    }
    const double row = U.matrix.row(i).sum();
    U.matrix.row(i) /= row;
  }
  U.nonreturn_rate = static_cast<double>(missing) / (static_cast<double>(bins) * points_per_bin);
  if (U.nonreturn_rate > 1e-6)
    U.warning = "non-return rate " + std::to_string(U.nonreturn_rate) + " above 1e-6 at cap " + std::to_string(cap) +
                "; censored mass closed with the long-return landing law";
  return U;
}

/// Nonnegative left fixed vector (sums to 1) by power iteration.
inline Eigen::VectorXd ulam_fixed_vector(const UlamMatrix& U, int max_iter = 100000, double tol = 1e-14) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(U.bins, 1.0 / U.bins);
  const Eigen::MatrixXd Pt = U.matrix.transpose();
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd nv = Pt * v;
    nv /= nv.sum();
    const double diff = (nv - v).lpNorm<1>();
    v = nv;
    if (diff < tol) return v;
  }
  throw NumericalFailure("ulam_fixed_vector: power iteration did not settle", tol);
}

/// Moduli of the two leading eigenvalues.
inline std::pair<double, double> ulam_leading_moduli(const UlamMatrix& U) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(U.matrix, false);
  std::vector<double> mod;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mod.push_back(std::abs(es.eigenvalues()[i]));
  std::sort(mod.begin(), mod.end(), std::greater<>());
  return {mod[0], mod.size() > 1 ? mod[1] : 0.0};
}

/// Total variation between the fixed vector and its image under one exact
/// induced step, pushed with a fresh jittered sample per bin.
inline double ulam_invariance_tv(const MapSpec& spec, const UlamMatrix& U, const Eigen::VectorXd& fixed,
                                 int points_per_bin, std::uint64_t seed, std::uint64_t cap = 1'000'000) {
  std::vector<std::vector<double>> pushed(U.bins, std::vector<double>(U.bins, 0.0));
  std::vector<double> lost(U.bins, 0.0);
  for_each_block(static_cast<std::size_t>(U.bins), [&](std::size_t i) {
    Engine rng = block_engine(seed, i);
    const double lo = U.bin_lo(static_cast<int>(i));
    for (int s = 0; s < points_per_bin; ++s) {
      const double x = lo + U.bin_width() * (s + uniform_open(rng)) / points_per_bin;
      const auto r = try_first_return(spec, x, cap);
      if (r) pushed[i][U.bin_of(r->landing)] += fixed[static_cast<Eigen::Index>(i)] / points_per_bin;
      else lost[i] += fixed[static_cast<Eigen::Index>(i)] / points_per_bin;
    }
  });
  std::vector<double> image(U.bins, 0.0);
  double lost_total = 0.0;
  for (int i = 0; i < U.bins; ++i) {
    for (int j = 0; j < U.bins; ++j) image[j] += pushed[i][j];
    lost_total += lost[i];
  }
  double tv = 0.5 * lost_total;
  for (int j = 0; j < U.bins; ++j) tv += 0.5 * std::abs(image[j] - fixed[j]);
  return tv;
}

struct DensityProfile {
  std::vector<double> x;        // bin centres
  std::vector<double> lo;       // bin edges
  std::vector<double> hi;
  std::vector<double> h;        // density, mean 1 on Ω
  double exponent = 0.0;        // fitted on [fit_lo, fit_hi]
  double stabilization = 0.0;   // sup change on [1/4,1] under one more step
  int octaves = 0;
};

namespace detail {

/// Lebesgue measure of [l,r) ∩ S^{-1}[b0,b1) for the slow branch S, whose
/// value at lift(x) − m lies in [0,1).
inline double slow_preimage_overlap(const MapSpec& spec, double l, double r, double m, double b0, double b1) {
  const double p0 = spec.lift_inverse(m + b0);
  const double p1 = spec.lift_inverse(m + b1);
  return std::max(0.0, std::min(r, p1) - std::max(l, p0));
}

}  // namespace detail

/// Invariant density of the full map from a Ulam discretization on graded
/// bins: octaves [2^{−o−1}, 2^{−o}) with `per_octave` equal sub-bins, down to
/// the depth where one slow step still moves points by a relative 1e−10, plus
/// one reservoir bin at the bottom. The profile is the fixed point of the
/// transfer iteration normalized to mean 1 on Ω, obtained by a sparse solve;
/// `iters` further transfer steps are applied from it and the last sup change
/// on [1/4,1] is reported.
inline DensityProfile infinite_density_profile(const MapSpec& spec, int per_octave, int iters, double fit_lo = 1e-3,
                                               double fit_hi = 1e-1) {
  if (per_octave < 2) throw DomainError("infinite_density_profile: need at least 2 bins per octave");
  // depth: (κx)^α ≥ 1e−10
  const double x_min = std::pow(1e-10, spec.gamma()) / spec.kappa();
  const int octaves = std::max(4, static_cast<int>(std::floor(-std::log2(x_min))));
  std::vector<double> edges{0.0};
  for (int o = octaves - 1; o >= 0; --o) {
    const double a = std::ldexp(1.0, -o - 1);
    for (int s = 0; s < per_octave; ++s) edges.push_back(a + a * s / per_octave);
  }
  edges.push_back(1.0);
  const int B = static_cast<int>(edges.size()) - 1;
  auto bin_of = [&](double x) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return std::clamp(static_cast<int>(it - edges.begin()) - 1, 0, B - 1);
  };

  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < B; ++i) {
    const double l = edges[i];
    const double r = edges[i + 1];
    const double len = r - l;
    std::vector<std::pair<int, double>> row;
    if (spec.is_T() && l >= 0.5) {
      const double y0 = 2.0 * l - 1.0;
      const double y1 = 2.0 * r - 1.0;
      for (int j = bin_of(y0); j < B && edges[j] < y1; ++j) {
        const double ov = std::min(y1, edges[j + 1]) - std::max(y0, edges[j]);
        if (ov > 0.0) row.emplace_back(j, ov / (y1 - y0));
      }
    } else {
      const double Y0 = spec.lift(l);
      const double Y1 = spec.lift(r);
      for (double m = std::floor(Y0); m < Y1; m += 1.0) {
        const double s0 = std::max(Y0, m) - m;
        const double s1 = std::min(Y1, m + 1.0) - m;
        for (int j = bin_of(s0); j < B && edges[j] < s1; ++j) {
          const double ov = detail::slow_preimage_overlap(spec, l, r, m, edges[j], edges[j + 1]);
          if (ov > 0.0) row.emplace_back(j, ov / len);
        }
      }
    }
    double tot = 0.0;
    for (auto& e : row) tot += e.second;
    for (auto& e : row) trip.emplace_back(i, e.first, e.second / tot);
  }
  Eigen::SparseMatrix<double> P(B, B);
  P.setFromTriplets(trip.begin(), trip.end());

  // stationary π: (Pᵀ − I) π = 0 with the last equation replaced by Σ π = 1
  Eigen::SparseMatrix<double> A = Eigen::SparseMatrix<double>(P.transpose());
  for (int i = 0; i < B; ++i) A.coeffRef(i, i) -= 1.0;
  A.makeCompressed();
  std::vector<Eigen::Triplet<double>> at;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      if (it.row() != B - 1) at.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < B; ++i) at.emplace_back(B - 1, i, 1.0);
  Eigen::SparseMatrix<double> A2(B, B);
  A2.setFromTriplets(at.begin(), at.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(B);
  rhs[B - 1] = 1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A2);
  if (lu.info() != Eigen::Success) throw NumericalFailure("infinite_density_profile: factorization failed", 0.0);
  Eigen::VectorXd pi = lu.solve(rhs);

  auto to_density = [&](const Eigen::VectorXd& mass) {
    std::vector<double> h(B);
    double omega = 0.0;
    for (int i = 0; i < B; ++i) {
      h[i] = mass[i] / (edges[i + 1] - edges[i]);
      if (edges[i] >= 0.5) omega += mass[i];
    }
    for (double& v : h) v /= omega / 0.5;
    return h;
  };
  std::vector<double> h = to_density(pi);
  const Eigen::SparseMatrix<double> Pt = P.transpose();
  double change = 0.0;
  for (int it = 0; it < std::max(1, iters); ++it) {
    Eigen::VectorXd next = Pt * pi;
    std::vector<double> hn = to_density(next);
    change = 0.0;
    for (int i = 0; i < B; ++i)
      if (edges[i] >= 0.25) change = std::max(change, std::abs(hn[i] - h[i]));
    pi = next;
    h = std::move(hn);
  }
  if (!(change < 1e-4))
    throw NumericalFailure("infinite_density_profile: profile did not stabilize on [1/4,1]", change);

  DensityProfile out;
  out.octaves = octaves;
  out.stabilization = change;
  std::vector<double> lx;
  std::vector<double> ly;
  for (int i = 1; i < B; ++i) {  // bin 0 is the reservoir
    const double c = 0.5 * (edges[i] + edges[i + 1]);
    out.x.push_back(c);
    out.lo.push_back(edges[i]);
    out.hi.push_back(edges[i + 1]);
    out.h.push_back(h[i]);
    if (c >= fit_lo && c <= fit_hi && h[i] > 0.0) {
      lx.push_back(std::log(c));
      ly.push_back(std::log(h[i]));
    }
  }
  if (lx.size() < 2) throw DomainError("infinite_density_profile: fit window holds fewer than two bins");
  out.exponent = fit_line(lx, ly).slope;
  return out;
}

struct DarlingKacResult {
  double ks_distance = 0.0;
  double a_hat = 0.0;
  double second_moment = 0.0;  // mean of (S_n / a_hat)²
  std::vector<double> normalized;  // S_n / a_hat per trial
};

/// Occupation counts S_n(x) = #{0 ≤ j < n : T^j x ∈ Ω}.
inline std::vector<std::uint64_t> occupation_counts(const MapSpec& spec, std::uint64_t n, std::size_t trials,
                                                    std::uint64_t seed) {
  std::vector<std::uint64_t> S(trials);
  for_each_block(block_count(trials), [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    const std::size_t end = std::min(trials, (b + 1) * kBlockSize);
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      double x = 0.5 + 0.5 * uniform_open(rng);
      std::uint64_t t = 0;  // T^t x = x ∈ Ω
      std::uint64_t count = 0;
      while (t < n) {
        ++count;
        const double y = spec.step(x);
        ++t;
        if (t >= n) break;
        if (in_omega(y)) {
          x = y;
          continue;
        }
        const Excursion e = run_excursion(spec, y, n - t);
        if (!e.returned) break;
        t += e.steps;
        x = e.landing;
      }
      S[i] = count;
    }
  });
  return S;
}

inline DarlingKacResult darling_kac_empirical(const MapSpec& spec, std::uint64_t n, std::size_t trials,
                                              std::uint64_t seed) {
  if (trials < 1000) throw DomainError("darling_kac_empirical: need at least 1000 trials");
  if (!(spec.gamma() < 1.0)) throw DomainError("darling_kac_empirical: needs gamma < 1");
  const auto S = occupation_counts(spec, n, trials, seed);
  DarlingKacResult out;
  CompensatedSum s;
  for (auto v : S) s.add(static_cast<double>(v));
  out.a_hat = s.value() / static_cast<double>(trials);
  out.normalized.resize(trials);
  CompensatedSum sq;
  for (std::size_t i = 0; i < trials; ++i) {
    out.normalized[i] = static_cast<double>(S[i]) / out.a_hat;
    sq.add(out.normalized[i] * out.normalized[i]);
  }
  out.second_moment = sq.value() / static_cast<double>(trials);
  const StableFamily fam(spec.gamma());
  const MittagLefflerTable table(fam);
  out.ks_distance = ks_distance(out.normalized, [&](double y) { return table.cdf(y); });
  return out;
}

struct MapTiedReport {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> deviation;  // D_N per checkpoint
  double scale_hat = 0.0;         // a_hat(n) = scale_hat · n^γ
  double target = 0.0;            // E g(W_γ)
  std::vector<double> q;          // q_n, n = 1..N
};

/// Cesàro deviation of the induced-orbit hit frequencies
///   q_n = E_Ω[ g(k/a(n)) ; φ_k = n for some k ]
/// from u(n) E g(W_γ), with a(n) calibrated from the occupation counts of the
/// same orbits.
inline MapTiedReport map_tied_down_estimate(const MapSpec& spec, std::int64_t N, std::size_t trials,
                                            const TestFunction& g, std::uint64_t seed,
                                            std::vector<std::int64_t> checkpoints = {}) {
  if (trials < 10000) throw DomainError("map_tied_down_estimate: need at least 10^4 trials");
  if (!(spec.gamma() < 1.0)) throw DomainError("map_tied_down_estimate: needs gamma < 1");
  if (checkpoints.empty()) checkpoints.push_back(N);
  const std::size_t blocks = block_count(trials);
  // per block: (n, k) of every return with n ≤ N, and occupation counts S_N
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> hits(blocks);
  std::vector<double> occ(blocks, 0.0);
  for_each_block(blocks, [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    const std::size_t end = std::min(trials, (b + 1) * kBlockSize);
    CompensatedSum s;
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      double x = 0.5 + 0.5 * uniform_open(rng);
      std::uint64_t t = 0;
      std::uint32_t k = 0;
      std::uint64_t count = 1;  // j = 0
      while (t < static_cast<std::uint64_t>(N)) {
        const double y = spec.step(x);
        std::uint64_t dt = 1;
        double land = y;
        if (!in_omega(y)) {
          const Excursion e = run_excursion(spec, y, static_cast<std::uint64_t>(N) - t - 1);
          if (!e.returned) break;
          dt += e.steps;
          land = e.landing;
        }
        t += dt;
        if (t > static_cast<std::uint64_t>(N)) break;
        ++k;
        hits[b].emplace_back(static_cast<std::uint32_t>(t), k);
        if (t < static_cast<std::uint64_t>(N)) ++count;
        x = land;
      }
      s.add(static_cast<double>(count));
    }
    occ[b] = s.value();
  });
  MapTiedReport rep;
  rep.checkpoints = checkpoints;
  const double gamma = spec.gamma();
  const double a_N = compensated_sum(occ) / static_cast<double>(trials);
  rep.scale_hat = a_N / std::pow(static_cast<double>(N), gamma);
  const StableFamily fam(gamma);
  rep.target = g.is_constant() ? g.constant_value() : tied_down_expect(fam, g);
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(N) + 1);
  for (const auto& blk : hits)
    for (const auto& [n, k] : blk) {
      const double an = rep.scale_hat * std::pow(static_cast<double>(n), gamma);
      acc[n].add(g(static_cast<double>(k) / an));
    }
  rep.q.resize(static_cast<std::size_t>(N));
  for (std::int64_t n = 1; n <= N; ++n)
    rep.q[static_cast<std::size_t>(n - 1)] = acc[static_cast<std::size_t>(n)].value() / static_cast<double>(trials);
  for (std::int64_t M : checkpoints) {
    CompensatedSum d;
    for (std::int64_t n = 1; n <= M; ++n) {
      const double dn = static_cast<double>(n);
      const double u = gamma * rep.scale_hat * std::pow(dn, gamma) / dn;
      d.add(std::abs(rep.q[static_cast<std::size_t>(n - 1)] - u * rep.target));
    }
    rep.deviation.push_back(d.value() / (rep.scale_hat * std::pow(static_cast<double>(M), gamma)));
  }
  return rep;
}

struct KacTrend {
  std::vector<double> t;
  std::vector<double> partial_mean;  // E(φ ∧ t) under the weighting density
  double exponent = 0.0;
};

/// Partial means E(φ ∧ t) for starts drawn from the Ulam invariant density on
/// Ω; the growth exponent in t is fitted on [t_lo, t_hi].
inline KacTrend kac_partial_means(const MapSpec& spec, const UlamMatrix& U, const Eigen::VectorXd& fixed,
                                  std::size_t samples, std::uint64_t seed, double t_lo = 1e2, double t_hi = 1e5) {
  const auto cap = static_cast<std::uint64_t>(t_hi) + 1;
  std::vector<double> cdf(U.bins);
  double acc = 0.0;
  for (int i = 0; i < U.bins; ++i) cdf[i] = (acc += fixed[i]);
  const std::size_t blocks = block_count(samples);
  std::vector<std::vector<std::uint64_t>> phis(blocks);
  for_each_block(blocks, [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    const std::size_t end = std::min(samples, (b + 1) * kBlockSize);
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      const double u = uniform_open(rng) * acc;
      const int bin = std::min<int>(U.bins - 1, static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin()));
      const double x = U.bin_lo(bin) + U.bin_width() * uniform_open(rng);
      const auto r = try_first_return(spec, x, cap);
      phis[b].push_back(r ? r->phi : cap);
    }
  });
  std::vector<std::uint64_t> all;
  for (auto& v : phis) all.insert(all.end(), v.begin(), v.end());
  KacTrend out;
  std::vector<double> lx;
  std::vector<double> ly;
  for (double lt = std::log10(t_lo); lt <= std::log10(t_hi) + 1e-9; lt += 0.25) {
    const double t = std::pow(10.0, lt);
    CompensatedSum s;
    for (auto v : all) s.add(std::min(static_cast<double>(v), t));
    const double m = s.value() / static_cast<double>(all.size());
    out.t.push_back(t);
    out.partial_mean.push_back(m);
    lx.push_back(std::log(t));
    ly.push_back(std::log(m));
  }
  out.exponent = fit_line(lx, ly).slope;
  return out;
}

}  // namespace tiedown
