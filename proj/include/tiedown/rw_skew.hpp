#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"
#include "tiedown/core/random.hpp"

namespace tiedown {

/// Step law on {−1, 0, +1}. Mean zero forces p(−1) = p(+1).
struct WalkLaw {
  double p_side = 0.25;
  double p_stay = 0.5;

  static WalkLaw lazy() { return {}; }

  WalkLaw() = default;
  WalkLaw(double side, double stay) : p_side(side), p_stay(stay) { validate(); }

  void validate() const {
    if (!(p_side > 0.0 && p_stay > 0.0)) throw InvalidLaw("WalkLaw: need p(±1) > 0 and p(0) > 0");
    if (std::abs(2.0 * p_side + p_stay - 1.0) > 1e-14) throw InvalidLaw("WalkLaw: probabilities must sum to 1");
  }
  double mean() const noexcept { return 0.0; }
  double variance() const noexcept { return 2.0 * p_side; }
  bool is_lazy() const noexcept { return p_side == 0.25 && p_stay == 0.5; }
};

inline constexpr std::int64_t kBridgeMaxN = 2000;

/// Joint law of (S_n, L_n), L_n = #{1 ≤ k ≤ n : S_k = 0}. Positions are folded
/// to |x| since the law is symmetric. In bridge mode positions that cannot get
/// back to 0 by time n are dropped, so only the S_n = 0 slice is complete.
class BridgeTable {
 public:
  BridgeTable(const WalkLaw& law, std::int64_t n, bool bridge_only = false) : n_(n), bridge_only_(bridge_only) {
    law.validate();
    if (n < 0) throw DomainError("BridgeTable: n must be nonnegative");
    if (n > kBridgeMaxN) throw ResourceError("BridgeTable: horizon exceeds the state-space bound", kBridgeMaxN);
    const std::size_t stride = static_cast<std::size_t>(n) + 1;
    const std::size_t rows = bridge_only ? stride / 2 + 1 : stride;
    std::vector<double> cur(rows * stride, 0.0);
    std::vector<double> nxt(rows * stride, 0.0);
    cur[0] = 1.0;
    const double ps = law.p_side;
    const double p0 = law.p_stay;
    auto width = [&](std::int64_t t) {
      return bridge_only ? std::min(t, n - t) : t;
    };
    for (std::int64_t t = 0; t < n; ++t) {
      const std::int64_t xo = width(t);
      const std::int64_t xn = width(t + 1);
      auto old = [&](std::int64_t x, std::int64_t l) -> double {
        if (x > xo || l < 0 || l > t) return 0.0;
        return cur[static_cast<std::size_t>(x) * stride + static_cast<std::size_t>(l)];
      };
      for (std::int64_t x = 0; x <= xn; ++x) {
        double* row = &nxt[static_cast<std::size_t>(x) * stride];
        const std::int64_t lmax = (x == 0) ? t + 1 : t + 1 - x;
        for (std::int64_t l = 0; l <= t + 1; ++l) {
          double v = 0.0;
          if (l <= lmax) {
            if (x == 0) {
              v = p0 * old(0, l - 1) + ps * old(1, l - 1);
            } else if (x == 1) {
              v = 2.0 * ps * old(0, l) + p0 * old(1, l) + ps * old(2, l);
            } else {
              v = ps * old(x - 1, l) + p0 * old(x, l) + ps * old(x + 1, l);
            }
          }
          row[l] = v;
        }
      }
      std::swap(cur, nxt);
    }
    width_ = width(n);
    joint_.assign(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>((width_ + 1) * stride));
  }

  std::int64_t n() const noexcept { return n_; }
  bool bridge_only() const noexcept { return bridge_only_; }

  /// P(S_n = x, L_n = l).
  double prob(std::int64_t x, std::int64_t l) const {
    const std::int64_t ax = x < 0 ? -x : x;
    if (l < 0 || l > n_ || ax > width_) return 0.0;
    const double v = joint_[static_cast<std::size_t>(ax) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(l)];
    return ax == 0 ? v : 0.5 * v;
  }

  double position_mass(std::int64_t x) const {
    CompensatedSum s;
    for (std::int64_t l = 0; l <= n_; ++l) s.add(prob(x, l));
    return s.value();
  }

  double total_mass() const {
    CompensatedSum s;
    for (std::int64_t x = -width_; x <= width_; ++x) s.add(position_mass(x));
    return s.value();
  }

  /// P(L_n = l | S_n = 0) for l = 0..n.
  std::vector<double> conditional_at_zero() const {
    const double z = position_mass(0);
    std::vector<double> out(static_cast<std::size_t>(n_) + 1);
    for (std::int64_t l = 0; l <= n_; ++l) out[static_cast<std::size_t>(l)] = prob(0, l) / z;
    return out;
  }

 private:
  std::int64_t n_;
  bool bridge_only_;
  std::int64_t width_ = 0;
  std::vector<double> joint_;
};

inline std::vector<double> bridge_local_time_exact(const WalkLaw& law, std::int64_t n) {
  if (n < 1) throw DomainError("bridge_local_time_exact: n must be positive");
  return BridgeTable(law, n, true).conditional_at_zero();
}

/// P(S_k = 0) for k = 0..n from k a_k = p0(2k−1) a_{k−1} + (4ps² − p0²)(k−1) a_{k−2}.
inline std::vector<double> return_probabilities(const WalkLaw& law, std::int64_t n) {
  law.validate();
  std::vector<double> a(static_cast<std::size_t>(std::max<std::int64_t>(n, 1)) + 1);
  const double p0 = law.p_stay;
  const double c = 4.0 * law.p_side * law.p_side - p0 * p0;
  a[0] = 1.0;
  a[1] = p0;
  for (std::size_t k = 2; k < a.size(); ++k) {
    const double dk = static_cast<double>(k);
    a[k] = (p0 * (2.0 * dk - 1.0) * a[k - 1] + c * (dk - 1.0) * a[k - 2]) / dk;
  }
  a.resize(static_cast<std::size_t>(n) + 1);
  return a;
}

/// Unconditional E(L_n) = Σ_{k=1}^n P(S_k = 0).
inline double local_time_mean(const WalkLaw& law, std::int64_t n) {
  if (n < 1) throw DomainError("local_time_mean: n must be positive");
  const auto a = return_probabilities(law, n);
  CompensatedSum s;
  for (std::size_t k = 1; k < a.size(); ++k) s.add(a[k]);
  return s.value();
}

/// E((L_n / E L_n)^j | S_n = 0).
inline double bridge_local_time_moments(const WalkLaw& law, std::int64_t n, int j) {
  if (j < 0 || j > 3) throw DomainError("bridge_local_time_moments: j must lie in {0,1,2,3}");
  if (j == 0) return 1.0;
  const auto pmf = bridge_local_time_exact(law, n);
  const double ah = local_time_mean(law, n);
  CompensatedSum s;
  for (std::size_t l = 0; l < pmf.size(); ++l) s.add(pmf[l] * std::pow(static_cast<double>(l) / ah, j));
  return s.value();
}

/// E(L_n | S_n = 0) / E(L_n).
inline double bridge_size_bias_ratio(const WalkLaw& law, std::int64_t n) {
  return bridge_local_time_moments(law, n, 1);
}

namespace detail {

/// Runs one path of n steps and returns (S_n, L_n).
template <class Rng>
std::pair<std::int64_t, std::int64_t> walk_path(const WalkLaw& law, std::int64_t n, Rng& rng) {
  std::int64_t s = 0;
  std::int64_t visits = 0;
  if (law.is_lazy()) {
    std::int64_t left = n;
    while (left > 0) {
      std::uint64_t w = rng();
      const std::int64_t m = std::min<std::int64_t>(left, 32);
      for (std::int64_t i = 0; i < m; ++i) {
        s += static_cast<std::int64_t>(w & 1u) - static_cast<std::int64_t>((w >> 1) & 1u);
        w >>= 2;
        visits += (s == 0);
      }
      left -= m;
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      const double u = uniform_open(rng);
      s += (u < law.p_side) ? -1 : (u < 2.0 * law.p_side ? 1 : 0);
      visits += (s == 0);
    }
  }
  return {s, visits};
}

}  // namespace detail

struct BridgeMc {
  std::vector<double> pmf;  // empirical P(L_n = l | S_n = 0), l = 0..n
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate = 0.0;
};

/// Rejection sampler for the bridge: keeps the paths with S_n = 0.
inline BridgeMc bridge_local_time_mc(const WalkLaw& law, std::int64_t n, std::uint64_t trials, std::uint64_t seed) {
  law.validate();
  if (n < 1) throw DomainError("bridge_local_time_mc: n must be positive");
  if (trials < 10000) throw DomainError("bridge_local_time_mc: trials must be at least 1e4");
  const std::size_t blocks = block_count(trials);
  const std::size_t width = static_cast<std::size_t>(n) + 1;
  std::vector<std::vector<std::uint64_t>> counts(blocks);
  for_each_block(blocks, [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    std::vector<std::uint64_t> c(width, 0);
    const std::uint64_t end = std::min<std::uint64_t>(trials, (b + 1) * kBlockSize);
    for (std::uint64_t i = b * kBlockSize; i < end; ++i) {
      const auto [s, l] = detail::walk_path(law, n, rng);
      if (s == 0) ++c[static_cast<std::size_t>(l)];
    }
    counts[b] = std::move(c);
  });
  BridgeMc out;
  out.trials = trials;
  std::vector<std::uint64_t> total(width, 0);
  for (const auto& c : counts)
    for (std::size_t l = 0; l < width; ++l) total[l] += c[l];
  for (auto c : total) out.accepted += c;
  out.acceptance_rate = static_cast<double>(out.accepted) / static_cast<double>(trials);
  if (out.acceptance_rate < 1.0 / std::sqrt(static_cast<double>(trials))) {
    const double r = std::max(out.acceptance_rate, 1.0 / static_cast<double>(trials));
    throw EfficiencyError("bridge_local_time_mc: acceptance rate too low",
                          static_cast<std::uint64_t>(std::ceil(4.0 / (r * r))));
  }
  out.pmf.resize(width);
  for (std::size_t l = 0; l < width; ++l)
    out.pmf[l] = static_cast<double>(total[l]) / static_cast<double>(out.accepted);
  return out;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  CompensatedSum s;
  const std::size_t m = std::max(p.size(), q.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    s.add(std::abs(a - b));
  }
  return 0.5 * s.value();
}

/// ½ Σ_l sqrt(p_l (1 − p_l) / samples): one standard error of the TV distance
/// scale for an empirical law drawn from p.
inline double tv_standard_error(const std::vector<double>& p, std::uint64_t samples) {
  CompensatedSum s;
  for (double v : p) s.add(std::sqrt(v * (1.0 - v) / static_cast<double>(samples)));
  return 0.5 * s.value();
}

/// Unconditional local times L_n, one per trial.
inline std::vector<std::uint64_t> local_time_samples(const WalkLaw& law, std::int64_t n, std::uint64_t trials,
                                                     std::uint64_t seed) {
  law.validate();
  if (n < 1) throw DomainError("local_time_samples: n must be positive");
  std::vector<std::uint64_t> out(trials);
  for_each_block(block_count(trials), [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    const std::uint64_t end = std::min<std::uint64_t>(trials, (b + 1) * kBlockSize);
    for (std::uint64_t i = b * kBlockSize; i < end; ++i)
      out[i] = static_cast<std::uint64_t>(detail::walk_path(law, n, rng).second);
  });
  return out;
}

struct WalkDarlingKac {
  double ks_distance = 0.0;
  double a_hat = 0.0;
  double mean = 0.0;  // mean of L_n / a_hat
  std::vector<double> normalized;
};

/// KS distance of L_n / E(L_n) to the half-normal law with density (2/π)e^{−y²/π}.
inline WalkDarlingKac walk_darling_kac(const WalkLaw& law, std::int64_t n, std::uint64_t trials, std::uint64_t seed) {
  WalkDarlingKac out;
  out.a_hat = local_time_mean(law, n);
  const auto L = local_time_samples(law, n, trials, seed);
  out.normalized.resize(L.size());
  CompensatedSum s;
  for (std::size_t i = 0; i < L.size(); ++i) {
    out.normalized[i] = static_cast<double>(L[i]) / out.a_hat;
    s.add(out.normalized[i]);
  }
  out.mean = s.value() / static_cast<double>(L.size());
  out.ks_distance = ks_distance(out.normalized, [](double y) { return y <= 0.0 ? 0.0 : std::erf(y / std::sqrt(kPi)); });
  return out;
}

struct AcceptanceTrend {
  std::vector<double> n;
  std::vector<double> rate;
  double slope = 0.0;
};

/// Empirical P(S_n = 0) across horizons and its log-log slope.
inline AcceptanceTrend acceptance_rate_trend(const WalkLaw& law, const std::vector<std::int64_t>& horizons,
                                            std::uint64_t trials, std::uint64_t seed) {
  AcceptanceTrend out;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const BridgeMc mc = bridge_local_time_mc(law, horizons[i], trials, seed + i);
    out.n.push_back(static_cast<double>(horizons[i]));
    out.rate.push_back(mc.acceptance_rate);
    lx.push_back(std::log(static_cast<double>(horizons[i])));
    ly.push_back(std::log(mc.acceptance_rate));
  }
  if (lx.size() >= 2) out.slope = fit_line(lx, ly).slope;
  return out;
}

}  // namespace tiedown
