#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"
#include "tiedown/core/random.hpp"
#include "tiedown/rv_asymptotics.hpp"

namespace tiedown {

/// C_γ = 1 / (Γ(1+γ) Γ(1−γ)).
inline double tail_constant(double gamma) {
  return 1.0 / (boost::math::tgamma(1.0 + gamma) * boost::math::tgamma(1.0 - gamma));
}

/// Polylogarithm Li_s(e^{iθ}) for 0 < s < 1 and |θ| ≤ π, via the expansion
/// Γ(1−s)(−iθ)^{s−1} + Σ_k ζ(s−k)(iθ)^k/k!.
inline std::complex<double> polylog_unit(double s, double theta) {
  if (theta == 0.0) throw DomainError("polylog_unit: singular at theta = 0");
  const std::complex<double> mu(0.0, theta);
  std::complex<double> sum = boost::math::tgamma(1.0 - s) * std::pow(-mu, s - 1.0);
  std::complex<double> power(1.0, 0.0);
  double fact = 1.0;
  for (int k = 0; k < 160; ++k) {
    if (k > 0) {
      power *= mu;
      fact *= static_cast<double>(k);
    }
    const std::complex<double> term = boost::math::zeta(s - static_cast<double>(k)) / fact * power;
    sum += term;
    if (k > 3 && std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

/// Canonical lattice increment φ = ξ + pJ with
///   P(J = j) = (j+1)^{−γ} − (j+2)^{−γ},   P(J > j) = (j+2)^{−γ}.
/// Its return sequence is a(t) = C_γ p^{−γ} t^γ, so that P(φ > t) ∼ C_γ / a(t).
class LatticeLaw {
 public:
  LatticeLaw(double gamma, std::int64_t p, std::int64_t xi) : gamma_(gamma), p_(p), xi_(xi) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("LatticeLaw: gamma must lie in (0,1)");
    if (p < 1) throw DomainError("LatticeLaw: p must be positive");
    if (!(xi > 0 && xi <= p)) throw DomainError("LatticeLaw: need 0 < xi <= p");
    if (gcd64(xi, p) != 1) throw InvalidLaw("LatticeLaw: gcd(xi, p) != 1, support does not generate the lattice");
    tail_scale_ = tail_constant(gamma) * std::pow(static_cast<double>(p), -gamma);
  }

  double gamma() const noexcept { return gamma_; }
  std::int64_t p() const noexcept { return p_; }
  std::int64_t xi() const noexcept { return xi_; }
  double tail_scale() const noexcept { return tail_scale_; }
  RegVarying return_sequence() const { return RegVarying(gamma_, tail_scale_); }

  /// P(J = j).
  double pmf_j(std::int64_t j) const {
    if (j < 0) return 0.0;
    const double a = static_cast<double>(j + 1);
    return std::pow(a, -gamma_) * -std::expm1(-gamma_ * std::log1p(1.0 / a));
  }
  /// P(J > j).
  double tail_j(std::int64_t j) const {
    if (j < 0) return 1.0;
    return std::pow(static_cast<double>(j + 2), -gamma_);
  }

  /// P(φ = m).
  double pmf(std::int64_t m) const {
    const std::int64_t d = m - xi_;
    if (d < 0 || d % p_ != 0) return 0.0;
    return pmf_j(d / p_);
  }
  /// P(φ > t).
  double tail(double t) const {
    if (t < static_cast<double>(xi_)) return 1.0;
    return tail_j(static_cast<std::int64_t>(std::floor((t - static_cast<double>(xi_)) / static_cast<double>(p_))));
  }

  std::int64_t draw_j(Engine& rng) const {
    const double v = uniform_open(rng);
    const double x = std::ceil(std::pow(v, -1.0 / gamma_));
    if (x > 9.0e18) return std::numeric_limits<std::int64_t>::max() / 4;
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(x) - 2);
  }
  std::int64_t draw(Engine& rng) const {
    const std::int64_t j = draw_j(rng);
    if (j > std::numeric_limits<std::int64_t>::max() / (4 * p_)) return std::numeric_limits<std::int64_t>::max() / 4;
    return xi_ + p_ * j;
  }

  /// ψ_J(θ) − 1 = (z−1)(Li_γ(z) − z)/z² with z = e^{iθ}.
  std::complex<double> char_j_minus_one(double theta) const {
    double th = std::remainder(theta, 2.0 * kPi);
    if (th == 0.0) return {0.0, 0.0};
    const std::complex<double> z = std::polar(1.0, th);
    return expm1_i(th) * (polylog_unit(gamma_, th) - z) / (z * z);
  }
  std::complex<double> char_j(double theta) const { return 1.0 + char_j_minus_one(theta); }

  /// E e^{iθφ}.
  std::complex<double> char_phi(double theta) const {
    return std::polar(1.0, theta * static_cast<double>(xi_)) * char_j(static_cast<double>(p_) * theta);
  }

 private:
  double gamma_;
  std::int64_t p_;
  std::int64_t xi_;
  double tail_scale_;
};

inline LatticeLaw build_lattice_law(double gamma, std::int64_t p, std::int64_t xi) { return LatticeLaw(gamma, p, xi); }

/// Pareto increment P(φ > t) = min(1, (t/t0)^{−γ}).
class ContinuousLaw {
 public:
  ContinuousLaw(double gamma, double t0) : gamma_(gamma), t0_(t0) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("ContinuousLaw: gamma must lie in (0,1)");
    if (!(t0 > 0.0)) throw DomainError("ContinuousLaw: t0 must be positive");
  }
  double gamma() const noexcept { return gamma_; }
  double t0() const noexcept { return t0_; }
  double tail(double t) const { return t <= t0_ ? 1.0 : std::pow(t / t0_, -gamma_); }
  double median() const { return t0_ * std::pow(2.0, 1.0 / gamma_); }
  RegVarying return_sequence() const { return RegVarying(gamma_, tail_constant(gamma_) * std::pow(t0_, -gamma_)); }
  double draw(Engine& rng) const { return t0_ * std::pow(uniform_open(rng), -1.0 / gamma_); }

 private:
  double gamma_;
  double t0_;
};

inline ContinuousLaw build_continuous_law(double gamma, double t0) { return ContinuousLaw(gamma, t0); }

/// Increment ξ + J with J the canonical p = 1 lattice law and ξ irrational;
/// values live in ξ + ℤ.
class DriftedLatticeLaw {
 public:
  DriftedLatticeLaw(double gamma, double xi) : base_(gamma, 1, 1), xi_(xi) {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("DriftedLatticeLaw: xi must be positive");
  }
  double gamma() const noexcept { return base_.gamma(); }
  double xi() const noexcept { return xi_; }
  double tail(double t) const { return t < xi_ ? 1.0 : base_.tail_j(static_cast<std::int64_t>(std::floor(t - xi_))); }
  RegVarying return_sequence() const { return base_.return_sequence(); }
  double draw(Engine& rng) const { return xi_ + static_cast<double>(base_.draw_j(rng)); }

 private:
  LatticeLaw base_;
  double xi_;
};

}  // namespace tiedown
