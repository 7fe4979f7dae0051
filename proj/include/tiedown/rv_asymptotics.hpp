#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tiedown/core/chebyshev.hpp"
#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"
#include "tiedown/core/quadrature.hpp"
#include "tiedown/core/test_function.hpp"
#include "tiedown/stable_laws.hpp"

namespace tiedown {

/// Pure power return sequence a(t) = c·t^γ.
class RegVarying {
 public:
  RegVarying(double gamma, double scale) : gamma_(gamma), scale_(scale) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("RegVarying: gamma must lie in (0,1]");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("RegVarying: scale must be positive");
  }

  double gamma() const noexcept { return gamma_; }
  double scale() const noexcept { return scale_; }

  double operator()(double t) const {
    if (!(t > 0.0)) throw DomainError("rv_eval: t must be positive");
    return scale_ * std::pow(t, gamma_);
  }

  double inverse(double y) const {
    if (!(y > 0.0)) throw DomainError("rv_inverse: y must be positive");
    return std::pow(y / scale_, 1.0 / gamma_);
  }

 private:
  double gamma_;
  double scale_;
};

inline double rv_eval(const RegVarying& a, double t) { return a(t); }
inline double rv_inverse(const RegVarying& a, double y) { return a.inverse(y); }

/// u(n) = γ a(n) / n.
inline double u_rate(const RegVarying& a, std::int64_t n) {
  if (n < 1) throw DomainError("u_rate: n must be positive");
  const double dn = static_cast<double>(n);
  return a.gamma() * a(dn) / dn;
}

/// x_{k,n} = n / a^{-1}(k).
inline double grid_point(const RegVarying& a, std::int64_t k, std::int64_t n) {
  return static_cast<double>(n) / a.inverse(static_cast<double>(k));
}

/// (a^{-1}(n+1) − a^{-1}(n)) · γ n / a^{-1}(n); tends to 1.
inline double smoothness_ratio(const RegVarying& a, std::int64_t n) {
  const double dn = static_cast<double>(n);
  const double lo = a.inverse(dn);
  return (a.inverse(dn + 1.0) - lo) * a.gamma() * dn / lo;
}

/// (1/a^{-1}(k)) / (u(n)·(x_{k,n} − x_{k+1,n}) / x_{k,n}^γ); tends to 1.
inline double grid_identity_ratio(const RegVarying& a, std::int64_t k, std::int64_t n) {
  const double x = grid_point(a, k, n);
  const double x1 = grid_point(a, k + 1, n);
  return (1.0 / a.inverse(static_cast<double>(k))) / (u_rate(a, n) * (x - x1) / std::pow(x, a.gamma()));
}

/// Half-open residue window [lo, hi) inside [0, p).
struct ResidueWindow {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(std::int64_t r) const noexcept {
    const double dr = static_cast<double>(r);
    return dr >= lo && dr < hi;
  }
  /// Number of integer residues in the window.
  double lattice_length() const noexcept {
    return std::max(0.0, std::ceil(hi) - std::ceil(lo));
  }
};

struct Lemma22Result {
  double value = 0.0;
  bool empty_window = false;
  std::int64_t terms = 0;
  std::int64_t k_lo = 0;
  std::int64_t k_hi = 0;
};

/// f_Z tabulated on [c,d] in log x; used by lemma22_sum where up to
/// 10^5 density values are needed.
class LogDensityTable {
 public:
  LogDensityTable(const StableFamily& fam, double c, double d, std::size_t panels = 96, std::size_t degree = 24)
      : c_(c), d_(d) {
    if (!(c > 0.0 && d > c)) throw DomainError("LogDensityTable: need 0 < c < d");
    table_ = ChebyshevPanels([&](double s) { return stable_density(fam, std::exp(s)); }, std::log(c),
                             std::log(d), panels, degree);
  }
  double operator()(double x) const { return table_(std::clamp(std::log(x), table_.lo(), table_.hi())); }
  double c() const noexcept { return c_; }
  double d() const noexcept { return d_; }

 private:
  double c_;
  double d_;
  ChebyshevPanels table_;
};

/// (1/u(n)) Σ_{k ≤ n, x_{k,n} ∈ [c,d]} g(x_{k,n}^{−γ}) · p f_Z(x_{k,n}) / a^{-1}(k) · 1_{I+pℤ}(n − kξ).
inline Lemma22Result lemma22_sum(const RegVarying& a, std::int64_t p, std::int64_t xi, ResidueWindow window,
                                 const TestFunction& g, const LogDensityTable& density, std::int64_t n) {
  if (p < 1) throw DomainError("lemma22_sum: p must be positive");
  if (gcd64(xi, p) != 1) throw DomainError("lemma22_sum: xi must be coprime to p");
  if (n < 1) throw DomainError("lemma22_sum: n must be positive");
  const double dn = static_cast<double>(n);
  const double c = density.c();
  const double d = density.d();
  // x_{k,n} ∈ [c,d]  ⇔  a(n/d) ≤ k ≤ a(n/c)
  auto k_lo = static_cast<std::int64_t>(std::ceil(a(dn / d) * (1.0 - 1e-15)));
  auto k_hi = static_cast<std::int64_t>(std::floor(a(dn / c) * (1.0 + 1e-15)));
  k_lo = std::max<std::int64_t>(k_lo, 1);
  k_hi = std::min<std::int64_t>(k_hi, n);
  Lemma22Result out;
  CompensatedSum s;
  const double gamma = a.gamma();
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    const double ainv = a.inverse(static_cast<double>(k));
    const double x = dn / ainv;
    if (x < c || x > d) continue;
    const std::int64_t r = (((n - k * xi) % p) + p) % p;
    if (!window.contains(r)) continue;
    ++out.terms;
    s.add(g(std::pow(x, -gamma)) * static_cast<double>(p) * density(x) / ainv);
  }
  out.k_lo = k_lo;
  out.k_hi = k_hi;
  out.empty_window = (k_hi < k_lo);
  out.value = s.value() / u_rate(a, n);
  return out;
}

/// interval_length · ∫_c^d g(x^{−γ}) x^{−γ} f_Z(x) dx.
inline double lemma22_limit(const StableFamily& fam, const TestFunction& g, double c, double d,
                            double interval_length) {
  if (!(c > 0.0 && d > c)) throw DomainError("lemma22_limit: need 0 < c < d");
  if (interval_length == 0.0) return 0.0;
  const double gamma = fam.gamma();
  auto f = [&](double s) {
    const double x = std::exp(s);
    const double y = std::pow(x, -gamma);
    return g(y) * y * stable_density(fam, x) * x;
  };
  const double lo = std::log(c);
  const double hi = std::log(d);
  const int panels = std::max(8, static_cast<int>(std::ceil((hi - lo) * 4.0)));
  CompensatedSum total;
  double err = 0.0;
  for (int i = 0; i < panels; ++i) {
    const QuadResult q = integrate_abs(f, lo + (hi - lo) * i / panels, lo + (hi - lo) * (i + 1) / panels, 1e-12, 10);
    total.add(q.value);
    err += q.error;
  }
  if (!(err < 1e-8)) throw NumericalFailure("lemma22_limit quadrature", err);
  return interval_length * total.value();
}

struct EquidistResult {
  double value = 0.0;       // Σ w_n 1_U(x0 + nξ mod p)
  double companion = 0.0;   // Σ w_n · |U| / p
  double total_weight = 0.0;
  double variation = 0.0;   // Σ |w_n − w_{n+1}| / Σ w_n
};

/// Weighted visit count of U by the rotation x0 + nξ (mod p); weights[i]
/// belongs to n = i + 1.
inline EquidistResult equidist_average(const std::vector<double>& weights, double xi, double p, double u_lo,
                                       double u_hi, double x0) {
  if (!(p > 0.0)) throw DomainError("equidist_average: p must be positive");
  if (!(u_lo >= 0.0 && u_hi <= p)) throw DomainError("equidist_average: U must lie in [0,p)");
  EquidistResult out;
  CompensatedSum hit;
  CompensatedSum tot;
  CompensatedSum var;
  const double len = std::max(0.0, u_hi - u_lo);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw DomainError("equidist_average: weights must be nonnegative");
    const double n = static_cast<double>(i + 1);
    double pos = std::fmod(x0 + std::fmod(n * xi, p), p);
    if (pos < 0.0) pos += p;
    if (pos >= u_lo && pos < u_hi) hit.add(weights[i]);
    tot.add(weights[i]);
    const double next = (i + 1 < weights.size()) ? weights[i + 1] : 0.0;
    var.add(std::abs(weights[i] - next));
  }
  out.value = hit.value();
  out.total_weight = tot.value();
  out.companion = out.total_weight * len / p;
  out.variation = out.total_weight > 0.0 ? var.value() / out.total_weight : 0.0;
  return out;
}

}  // namespace tiedown
