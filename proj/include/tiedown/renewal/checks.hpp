#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"
#include "tiedown/core/random.hpp"
#include "tiedown/core/test_function.hpp"
#include "tiedown/renewal/convolution.hpp"
#include "tiedown/renewal/lattice_law.hpp"
#include "tiedown/rv_asymptotics.hpp"
#include "tiedown/stable_laws.hpp"

namespace tiedown {

/// True when some k ∈ [1,n] has kξ ≤ n and kξ ≡ n (mod p), i.e. P(∃k: φ_k = n) > 0.
inline bool renewal_reachable(const LatticeLaw& law, std::int64_t n) {
  const std::int64_t p = law.p();
  const std::int64_t xi = law.xi();
  for (std::int64_t k = 1; k <= std::min<std::int64_t>(p, n); ++k) {
    if (k * xi <= n && (n - k * xi) % p == 0) return true;
  }
  return false;
}

struct SrtResult {
  double tied_sum = 0.0;
  double u_n = 0.0;
  double ratio = 0.0;
  bool unreachable = false;
};

/// Σ_{k ≤ n} P(φ_k = n) against u(n).
inline SrtResult srt_profile(const ConvolutionTable& table, const RegVarying& a, std::int64_t n) {
  if (n < 1 || n > table.M()) throw RangeError("srt_profile: n outside table");
  SrtResult out;
  out.u_n = u_rate(a, n);
  out.unreachable = !renewal_reachable(table.law(), n);
  CompensatedSum s;
  const std::int64_t kmax = std::min(n, table.K());
  for (std::int64_t k = 1; k <= kmax; ++k) s.add(table.prob(k, n));
  out.tied_sum = s.value();
  out.ratio = out.tied_sum / out.u_n;
  return out;
}

struct TiedResult {
  double value = 0.0;
  bool unreachable = false;
};

/// (1/u(n)) Σ_{k ≤ n} g(k/a(n)) P(φ_k = n).
inline TiedResult tied_down_functional(const ConvolutionTable& table, const RegVarying& a, std::int64_t n,
                                       const TestFunction& g) {
  if (n < 1 || n > table.M()) throw RangeError("tied_down_functional: n outside table");
  TiedResult out;
  out.unreachable = !renewal_reachable(table.law(), n);
  const double an = a(static_cast<double>(n));
  CompensatedSum s;
  const std::int64_t kmax = std::min(n, table.K());
  for (std::int64_t k = 1; k <= kmax; ++k) {
    const double pk = table.prob(k, n);
    if (pk != 0.0) s.add(g(static_cast<double>(k) / an) * pk);
  }
  out.value = s.value() / u_rate(a, n);
  return out;
}

/// A_n = Σ_{k ≤ n} g(k/a(n)) P(φ_k = n) for n = 1..N (index n−1), streamed
/// row by row so that no table is held.
inline std::vector<double> tied_sums_streaming(const LatticeLaw& law, const RegVarying& a, std::int64_t N,
                                               const TestFunction& g, const ConvolutionOptions& opt = {}) {
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(N));
  std::vector<double> inv_an(static_cast<std::size_t>(N));
  for (std::int64_t n = 1; n <= N; ++n) inv_an[static_cast<std::size_t>(n - 1)] = 1.0 / a(static_cast<double>(n));
  const std::int64_t p = law.p();
  const std::int64_t xi = law.xi();
  const bool constant = g.is_constant();
  const double cval = g.constant_value();
  stream_convolutions(
      law, N, N,
      [&](const ConvolutionRow& row) {
        const double dk = static_cast<double>(row.k);
        for (std::size_t j = 0; j < row.probs.size(); ++j) {
          const double pr = row.probs[j];
          if (pr == 0.0) continue;
          const std::int64_t n = row.k * xi + p * static_cast<std::int64_t>(j);
          const auto idx = static_cast<std::size_t>(n - 1);
          acc[idx].add((constant ? cval : g(dk * inv_an[idx])) * pr);
        }
      },
      opt);
  std::vector<double> out(static_cast<std::size_t>(N));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].value();
  return out;
}

inline std::vector<double> tied_sums_from_table(const ConvolutionTable& table, const RegVarying& a, std::int64_t N,
                                                const TestFunction& g) {
  std::vector<double> out(static_cast<std::size_t>(N));
  for (std::int64_t n = 1; n <= N; ++n) {
    const double an = a(static_cast<double>(n));
    CompensatedSum s;
    for (std::int64_t k = 1; k <= std::min(n, table.K()); ++k) {
      const double pk = table.prob(k, n);
      if (pk != 0.0) s.add(g(static_cast<double>(k) / an) * pk);
    }
    out[static_cast<std::size_t>(n - 1)] = s.value();
  }
  return out;
}

/// (1/a(N)) Σ_{n ≤ N} |A_n − u(n) 1_reach(n) target| for precomputed A_n.
inline double cesaro_deviation_from_sums(const LatticeLaw& law, const RegVarying& a, const std::vector<double>& sums,
                                         double target) {
  const auto N = static_cast<std::int64_t>(sums.size());
  CompensatedSum s;
  for (std::int64_t n = 1; n <= N; ++n) {
    const double expect = renewal_reachable(law, n) ? u_rate(a, n) * target : 0.0;
    s.add(std::abs(sums[static_cast<std::size_t>(n - 1)] - expect));
  }
  return s.value() / a(static_cast<double>(N));
}

inline double cesaro_deviation(const ConvolutionTable& table, const RegVarying& a, std::int64_t N,
                               const TestFunction& g, const StableFamily& family) {
  if (N < 1 || N > table.M()) throw RangeError("cesaro_deviation: N outside table");
  const double target = g.is_constant() ? g.constant_value() : tied_down_expect(family, g);
  return cesaro_deviation_from_sums(table.law(), a, tied_sums_from_table(table, a, N, g), target);
}

/// Same metric without holding a table; needed for N ≳ 10^5.
inline double cesaro_deviation_streaming(const LatticeLaw& law, const RegVarying& a, std::int64_t N,
                                         const TestFunction& g, const StableFamily& family,
                                         const ConvolutionOptions& opt = {}) {
  if (N < 1) throw DomainError("cesaro_deviation: N must be positive");
  const double target = g.is_constant() ? g.constant_value() : tied_down_expect(family, g);
  return cesaro_deviation_from_sums(law, a, tied_sums_streaming(law, a, N, g, opt), target);
}

struct LltPoint {
  std::int64_t k = 0;
  double kappa = 0.0;
  double lhs = 0.0;  // a^{-1}(n) P(φ_n = k)
  double rhs = 0.0;  // p 1_{pℤ}(nξ − k) f_Z(k / a^{-1}(n))
  bool reachable = false;
};

namespace detail {

inline std::vector<std::int64_t> llt_points(double ainv, std::pair<double, double> window, std::size_t max_points) {
  if (!(window.first > 0.0 && window.second > window.first)) throw DomainError("periodic_llt_profile: bad window");
  const auto k_lo = static_cast<std::int64_t>(std::ceil(window.first * ainv));
  const auto k_hi = static_cast<std::int64_t>(std::floor(window.second * ainv));
  std::vector<std::int64_t> ks;
  if (k_hi < k_lo) return ks;
  const auto span = static_cast<std::uint64_t>(k_hi - k_lo + 1);
  if (span <= max_points) {
    for (std::int64_t k = k_lo; k <= k_hi; ++k) ks.push_back(k);
  } else {
    for (std::size_t i = 0; i < max_points; ++i)
      ks.push_back(k_lo + static_cast<std::int64_t>((static_cast<double>(i) / static_cast<double>(max_points - 1)) *
                                                    static_cast<double>(k_hi - k_lo)));
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  }
  return ks;
}

}  // namespace detail

/// LLT profile read off an exact table (needs M ≥ κ_max a^{-1}(n)).
inline std::vector<LltPoint> periodic_llt_profile(const ConvolutionTable& table, const StableFamily& family,
                                                  const RegVarying& a, std::int64_t n,
                                                  std::pair<double, double> kappa_window,
                                                  std::size_t max_points = 1000) {
  const double ainv = a.inverse(static_cast<double>(n));
  if (n > table.K()) throw RangeError("periodic_llt_profile: n beyond table order");
  if (kappa_window.second * ainv > static_cast<double>(table.M()))
    throw RangeError("periodic_llt_profile: window beyond table range");
  const auto& law = table.law();
  std::vector<LltPoint> out;
  for (std::int64_t k : detail::llt_points(ainv, kappa_window, max_points)) {
    LltPoint pt;
    pt.k = k;
    pt.kappa = static_cast<double>(k) / ainv;
    pt.reachable = ((n * law.xi() - k) % law.p() == 0);
    pt.lhs = ainv * table.prob(n, k);
    pt.rhs = pt.reachable ? static_cast<double>(law.p()) * stable_density(family, pt.kappa) : 0.0;
    out.push_back(pt);
  }
  return out;
}

/// Exact P(J_1+…+J_n = j) for many j by Fourier inversion of ψ_J^n,
///   P = (1/π) ∫_0^π Re[ψ_J(θ)^n e^{−ijθ}] dθ,
/// with ψ_J^n tabulated once on Gauss-Legendre panels.
class SpectralLattice {
 public:
  SpectralLattice(const LatticeLaw& law, std::int64_t n, std::int64_t j_max, double log_cut = -40.0) {
    if (n < 1) throw DomainError("SpectralLattice: n must be positive");
    using GL = boost::math::quadrature::gauss<double, 20>;
    const double dn = static_cast<double>(n);
    auto logpsi = [&](double th) { return dn * complex_log1p(law.char_j_minus_one(th)); };
    const double a_j = std::pow(dn, 1.0 / law.gamma());  // natural J-scale
    const double scale = 1.0 / a_j;
    double cut = scale;
    while (cut < kPi && logpsi(cut).real() > log_cut) cut *= 1.1;
    cut = std::min(cut, kPi);
    for (int i = 0; i <= 2000; ++i) {
      const double th = cut + (kPi - cut) * i / 2000.0;
      if (th > cut && logpsi(th).real() > log_cut) throw NumericalFailure("SpectralLattice: slow tail", logpsi(th).real());
    }
    std::vector<double> edges{0.0};
    for (double e = scale * 1e-8; e < scale; e *= 4.0) edges.push_back(e);
    const double width = std::min(1.0 / static_cast<double>(std::max<std::int64_t>(j_max, 1)), scale) * 2.0;
    for (double e = scale; e < cut; e += width) edges.push_back(e);
    edges.push_back(cut);
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const double mid = 0.5 * (edges[i] + edges[i + 1]);
      const double half = 0.5 * (edges[i + 1] - edges[i]);
      if (half <= 0.0) continue;
      for (std::size_t q = 0; q < x.size(); ++q) {
        for (int sgn : {1, -1}) {
          if (q == 0 && sgn == -1 && x[0] == 0.0) continue;
          const double th = mid + sgn * half * x[q];
          nodes_.push_back(th);
          weights_.push_back(half * w[q]);
          values_.push_back(std::exp(logpsi(th)));
        }
      }
    }
  }

  double prob(std::int64_t j) const {
    if (j < 0) return 0.0;
    CompensatedSum s;
    const double dj = static_cast<double>(j);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double ph = dj * nodes_[i];
      s.add(weights_[i] * (values_[i].real() * std::cos(ph) + values_[i].imag() * std::sin(ph)));
    }
    return s.value() / kPi;
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<std::complex<double>> values_;
};

/// LLT profile from the exact characteristic function; used when
/// κ_max a^{-1}(n) is far beyond what a table can hold.
inline std::vector<LltPoint> periodic_llt_profile_spectral(const LatticeLaw& law, const StableFamily& family,
                                                           const RegVarying& a, std::int64_t n,
                                                           std::pair<double, double> kappa_window,
                                                           std::size_t max_points = 1000) {
  const double ainv = a.inverse(static_cast<double>(n));
  const auto ks = detail::llt_points(ainv, kappa_window, max_points);
  std::vector<LltPoint> out;
  if (ks.empty()) return out;
  const std::int64_t j_max = (ks.back() - n * law.xi()) / law.p();
  SpectralLattice spec(law, n, std::max<std::int64_t>(j_max, 1));
  for (std::int64_t k : ks) {
    LltPoint pt;
    pt.k = k;
    pt.kappa = static_cast<double>(k) / ainv;
    const std::int64_t d = k - n * law.xi();
    pt.reachable = (d % law.p() == 0);
    if (pt.reachable && d >= 0) pt.lhs = ainv * spec.prob(d / law.p());
    pt.rhs = pt.reachable ? static_cast<double>(law.p()) * stable_density(family, pt.kappa) : 0.0;
    out.push_back(pt);
  }
  return out;
}

struct NagaevResult {
  std::complex<double> lhs;
  std::complex<double> rhs;
};

/// λ(2πt/a^{-1}(n))^n against Φ_Z(2πt); for iid increments the eigenvalue is
/// the characteristic function of φ.
inline NagaevResult nagaev_check(const LatticeLaw& law, const StableFamily& family, double t, std::int64_t n) {
  if (n < 1) throw DomainError("nagaev_check: n must be positive");
  const RegVarying a = law.return_sequence();
  const double theta = 2.0 * kPi * t / a.inverse(static_cast<double>(n));
  const std::complex<double> step(0.0, theta * static_cast<double>(law.xi()));
  const std::complex<double> logpsi = complex_log1p(law.char_j_minus_one(static_cast<double>(law.p()) * theta));
  return {std::exp(static_cast<double>(n) * (step + logpsi)), stable_char(family, 2.0 * kPi * t)};
}

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Monte Carlo of (1/u(n)) Σ_k g(k/a(n)) 1[φ_k ∈ n + I] over renewal paths
/// with Pareto increments; every k landing in n + I is counted.
template <class Law>
McEstimate mc_tied_down_continuous(const Law& law, const RegVarying& a, double n, std::pair<double, double> I,
                                   const TestFunction& g, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DomainError("mc_tied_down_continuous: trials must be positive");
  if (!(I.second > I.first)) throw DomainError("mc_tied_down_continuous: interval must have positive length");
  const double lo = n + I.first;
  const double hi = n + I.second;
  const double an = a(n);
  const std::size_t blocks = block_count(trials);
  std::vector<double> sums(blocks, 0.0);
  std::vector<double> sqs(blocks, 0.0);
  for_each_block(blocks, [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    const std::size_t end = std::min(trials, (b + 1) * kBlockSize);
    CompensatedSum s;
    CompensatedSum q;
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      double pos = 0.0;
      double acc = 0.0;
      for (std::int64_t k = 1;; ++k) {
        pos += law.draw(rng);
        if (pos > lo && pos < hi) acc += g(static_cast<double>(k) / an);
        if (pos >= hi) break;
      }
      s.add(acc);
      q.add(acc * acc);
    }
    sums[b] = s.value();
    sqs[b] = q.value();
  });
  const double total = compensated_sum(sums);
  const double total_sq = compensated_sum(sqs);
  const double dt = static_cast<double>(trials);
  const double mean = total / dt;
  const double var = trials > 1 ? std::max(0.0, (total_sq - dt * mean * mean) / (dt - 1.0)) : 0.0;
  const double u = a.gamma() * an / n;
  return {mean / u, std::sqrt(var / dt) / u};
}

/// Monte Carlo frequencies of [φ_k = m] for a list of (k, m) pairs from one set
/// of simulated renewal paths.
inline std::vector<McEstimate> mc_hit_probabilities(const LatticeLaw& law,
                                                    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                                    std::size_t trials, std::uint64_t seed) {
  std::int64_t kmax = 0;
  for (auto& pr : pairs) kmax = std::max(kmax, pr.first);
  const std::size_t blocks = block_count(trials);
  std::vector<std::vector<std::uint64_t>> hits(blocks, std::vector<std::uint64_t>(pairs.size(), 0));
  for_each_block(blocks, [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    const std::size_t end = std::min(trials, (b + 1) * kBlockSize);
    std::vector<std::int64_t> path(static_cast<std::size_t>(kmax) + 1);
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      std::int64_t pos = 0;
      for (std::int64_t k = 1; k <= kmax; ++k) {
        pos += law.draw(rng);
        path[static_cast<std::size_t>(k)] = pos;
      }
      for (std::size_t q = 0; q < pairs.size(); ++q)
        if (path[static_cast<std::size_t>(pairs[q].first)] == pairs[q].second) ++hits[b][q];
    }
  });
  std::vector<McEstimate> out(pairs.size());
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    std::uint64_t h = 0;
    for (std::size_t b = 0; b < blocks; ++b) h += hits[b][q];
    const double f = static_cast<double>(h) / static_cast<double>(trials);
    out[q] = {f, std::sqrt(f * (1.0 - f) / static_cast<double>(trials))};
  }
  return out;
}

}  // namespace tiedown
