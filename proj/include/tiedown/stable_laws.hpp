#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "tiedown/core/chebyshev.hpp"
#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"
#include "tiedown/core/quadrature.hpp"
#include "tiedown/core/random.hpp"
#include "tiedown/core/test_function.hpp"

namespace tiedown {

struct QuadratureConfig {
  double abs_tol = 1e-13;      // per-panel target for the inversion integral
  double fail_tol = 1e-9;      // accumulated error estimate above which we give up
  unsigned max_depth = 12;
  unsigned panels = 48;        // panels of the contour integral
};

/// The three limit laws for a fixed index γ ∈ (0,1):
///   Z_γ  positive stable,   E e^{−sZ} = exp(−s^γ / Γ(1+γ)),
///   Y_γ  = Z_γ^{−γ}         Mittag-Leffler with E Y = 1,
///   W_γ  size-biased Y_γ,   E g(W) = E(Y g(Y)).
class StableFamily {
 public:
  explicit StableFamily(double gamma, QuadratureConfig cfg = {}) : gamma_(gamma), cfg_(cfg) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("StableFamily: gamma must lie in (0,1)");
    lambda_ = 1.0 / boost::math::tgamma(1.0 + gamma);
    crossover_ = std::pow(lambda_, 1.0 / gamma);
    // half-angle of the admissible rotation sector for the inversion contour
    theta_ = std::min(kPi / 4.0, 0.5 * (kPi / (2.0 * gamma) - kPi / 2.0));
  }

  double gamma() const noexcept { return gamma_; }
  double laplace_scale() const noexcept { return lambda_; }
  const QuadratureConfig& quadrature() const noexcept { return cfg_; }
  /// x above which the large-x series is used; λ x^{−γ} = 1 there.
  double crossover() const noexcept { return crossover_; }
  double contour_angle() const noexcept { return theta_; }
  /// Window where both density routes are evaluated and compared;
  /// λ x^{−γ} runs over [1/2, 1] there.
  std::pair<double, double> overlap_window() const noexcept {
    return {crossover_, crossover_ * std::pow(2.0, 1.0 / gamma_)};
  }

 private:
  double gamma_;
  QuadratureConfig cfg_;
  double lambda_ = 1.0;
  double crossover_ = 1.0;
  double theta_ = 0.0;
};

namespace detail {

/// Σ_{k≥1} (−1)^{k+1}/k! · Γ(kγ+1) · sin(kπγ) · z^k · w(k), summed until the
/// term envelope drops below 1e−18 of the running magnitude.
template <class Weight>
double stable_series(double gamma, double z, Weight&& weight) {
  CompensatedSum s;
  double peak = 0.0;
  const double logz = std::log(z);
  for (int k = 1; k < 400; ++k) {
    const double dk = static_cast<double>(k);
    const double logmag = boost::math::lgamma(dk * gamma + 1.0) - boost::math::lgamma(dk + 1.0) + dk * logz;
    const double mag = std::exp(logmag);
    const double term = ((k % 2 == 1) ? 1.0 : -1.0) * mag * std::sin(dk * kPi * gamma) * weight(k);
    s.add(term);
    peak = std::max(peak, std::abs(mag * weight(k)));
    if (k > 4 && mag * std::abs(weight(k)) < 1e-18 * peak && logmag < 0.0) break;
  }
  return s.value();
}

}  // namespace detail

/// Large-x expansion of f_Z; used where λ x^{−γ} ≤ 1.
inline double stable_density_series(const StableFamily& fam, double x) {
  if (!(x > 0.0)) throw DomainError("stable_density: x must be positive");
  const double g = fam.gamma();
  const double z = fam.laplace_scale() * std::pow(x, -g);
  return detail::stable_series(g, z, [](int) { return 1.0; }) / (kPi * x);
}

/// f_Z by inversion of the characteristic function along the rotated ray
/// t = r e^{−iθ}, substituted as r = s^{1/γ} so that the stable factor decays
/// like e^{−λ cos β · s}.
inline double stable_density_inversion(const StableFamily& fam, double x) {
  if (!(x > 0.0)) throw DomainError("stable_density: x must be positive");
  const double g = fam.gamma();
  const double lam = fam.laplace_scale();
  const double th = fam.contour_angle();
  const double beta = g * (th + kPi / 2.0);
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  const double st = std::sin(th);
  const double ct = std::cos(th);
  const double inv_g = 1.0 / g;
  const std::complex<double> rot = std::polar(1.0, -th);

  auto integrand = [&](double s) -> double {
    if (s <= 0.0) return 0.0;
    const double r = std::pow(s, inv_g);
    const double jac = inv_g * r / s;
    const double re = -x * r * st - lam * s * cb;
    const double im = -x * r * ct + lam * s * sb;
    const std::complex<double> w = rot * std::polar(std::exp(re), im);
    return jac * w.real();
  };

  const double cut = 46.0;
  double s_max = cut / (lam * cb);
  if (st > 0.0) s_max = std::min(s_max, std::pow(cut / (x * st), g));
  const auto& cfg = fam.quadrature();
  CompensatedSum total;
  double err_total = 0.0;
  // geometric panels near 0 where the Jacobian s^{1/γ−1} is rough
  std::vector<double> edges{0.0};
  double first = s_max / static_cast<double>(cfg.panels);
  for (double e = first * 1e-6; e < first; e *= 8.0) edges.push_back(e);
  for (unsigned i = 1; i <= cfg.panels; ++i) edges.push_back(s_max * i / cfg.panels);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const QuadResult q = integrate_abs(integrand, edges[i], edges[i + 1], cfg.abs_tol, cfg.max_depth);
    total.add(q.value);
    err_total += q.error;
  }
  if (!(err_total < cfg.fail_tol)) throw NumericalFailure("stable_density inversion did not converge", err_total);
  return std::max(0.0, total.value() / kPi);
}

/// Density f_Z(x) of the positive stable law.
inline double stable_density(const StableFamily& fam, double x) {
  if (!(x > 0.0)) throw DomainError("stable_density: x must be positive");
  if (x >= fam.crossover()) return stable_density_series(fam, x);
  return stable_density_inversion(fam, x);
}

/// ∫_x^∞ f_Z for x ≥ crossover, by termwise integration of the series.
inline double stable_upper_tail(const StableFamily& fam, double x) {
  if (x < fam.crossover()) throw DomainError("stable_upper_tail: x below series crossover");
  const double g = fam.gamma();
  const double z = fam.laplace_scale() * std::pow(x, -g);
  return detail::stable_series(g, z, [g](int k) { return 1.0 / (k * g); }) / kPi;
}

inline double stable_laplace(const StableFamily& fam, double s) {
  if (!(s >= 0.0)) throw DomainError("stable_laplace: s must be nonnegative");
  return std::exp(-fam.laplace_scale() * std::pow(s, fam.gamma()));
}

inline std::complex<double> stable_char(const StableFamily& fam, double t) {
  if (t == 0.0) return {1.0, 0.0};
  const double g = fam.gamma();
  const double mag = fam.laplace_scale() * std::pow(std::abs(t), g);
  const double sgn = t > 0.0 ? 1.0 : -1.0;
  return std::exp(std::complex<double>(-mag * std::cos(g * kPi / 2.0), mag * sgn * std::sin(g * kPi / 2.0)));
}

/// One draw of Z_γ by Kanter's representation (A(U)/E)^{(1−γ)/γ}, rescaled
/// from Laplace exponent s^γ to λ s^γ.
inline double draw_stable(const StableFamily& fam, Engine& rng) {
  const double g = fam.gamma();
  const double u = kPi * uniform_open(rng);
  const double e = exponential1(rng);
  const double a = std::pow(std::sin(g * u), g / (1.0 - g)) * std::sin((1.0 - g) * u) /
                   std::pow(std::sin(u), 1.0 / (1.0 - g));
  return std::pow(fam.laplace_scale(), 1.0 / g) * std::pow(a / e, (1.0 - g) / g);
}

inline std::vector<double> sample_stable(const StableFamily& fam, std::uint64_t seed, std::size_t count) {
  if (count == 0) throw DomainError("sample_stable: count must be positive");
  std::vector<double> out(count);
  for_each_block(block_count(count), [&](std::size_t b) {
    Engine rng = block_engine(seed, b);
    const std::size_t end = std::min(count, (b + 1) * kBlockSize);
    for (std::size_t i = b * kBlockSize; i < end; ++i) out[i] = draw_stable(fam, rng);
  });
  return out;
}

/// E(Y_γ^k) = k! Γ(1+γ)^k / Γ(1+kγ).
inline double ml_moment(const StableFamily& fam, int k) {
  if (k < 0) throw DomainError("ml_moment: k must be nonnegative");
  const double g = fam.gamma();
  const double dk = static_cast<double>(k);
  return std::exp(boost::math::lgamma(dk + 1.0) + dk * boost::math::lgamma(1.0 + g) -
                  boost::math::lgamma(1.0 + dk * g));
}

/// f_Y(y) at y = 0 equals sin(πγ)/(πγ).
inline double ml_density_at_zero(const StableFamily& fam) {
  const double g = fam.gamma();
  return std::sin(kPi * g) / (kPi * g);
}

/// Density of Y_γ. Below y = 1/λ the power series in y is used directly
/// (it is the change of variables of the large-x series of f_Z).
inline double ml_density(const StableFamily& fam, double y) {
  if (!(y > 0.0)) throw DomainError("ml_density: y must be positive");
  const double g = fam.gamma();
  const double lam = fam.laplace_scale();
  if (lam * y <= 1.0) {
    const double z = lam * y;
    // Σ c_k z^k / y  with the leading y^{-1} absorbed: c_k z^{k}/ (λ y) · λ
    return detail::stable_series(g, z, [](int) { return 1.0; }) / (kPi * g * y);
  }
  const double x = std::pow(y, -1.0 / g);
  return stable_density(fam, x) * x / (g * y);
}

/// E(g(W_γ)) = ∫ y g(y) f_Y(y) dy by adaptive Gauss-Kronrod on panels.
inline double tied_down_expect(const StableFamily& fam, const TestFunction& g) {
  const double deg = g.is_bounded() ? 0.0 : static_cast<double>(g.growth_degree());
  double y_max = 2.0;
  while (ml_density(fam, y_max) * std::pow(y_max, deg + 2.0) > 1e-18) y_max *= 1.25;
  const int panels = 64;
  CompensatedSum total;
  double err_total = 0.0;
  auto f = [&](double y) { return y > 0.0 ? y * g(y) * ml_density(fam, y) : 0.0; };
  for (int i = 0; i < panels; ++i) {
    const QuadResult q = integrate_abs(f, y_max * i / panels, y_max * (i + 1) / panels, 1e-13, 12);
    total.add(q.value);
    err_total += q.error;
  }
  if (!(err_total < 1e-8)) throw NumericalFailure("tied_down_expect quadrature", err_total);
  return total.value();
}

/// Tabulated f_Y with cumulative integral; used for Kolmogorov distances and
/// anywhere many density values are needed.
class MittagLefflerTable {
 public:
  explicit MittagLefflerTable(const StableFamily& fam, std::size_t panels = 96, std::size_t degree = 24)
      : gamma_(fam.gamma()) {
    y_max_ = 2.0;
    while (ml_density(fam, y_max_) > 1e-17) y_max_ *= 1.25;
    f0_ = ml_density_at_zero(fam);
    table_ = ChebyshevPanels(
        [&](double y) { return y > 0.0 ? ml_density(fam, y) : f0_; }, 0.0, y_max_, panels, degree);
  }

  double y_max() const noexcept { return y_max_; }
  double density(double y) const { return (y < 0.0 || y > y_max_) ? 0.0 : table_(y); }
  double cdf(double y) const {
    if (y <= 0.0) return 0.0;
    if (y >= y_max_) return 1.0;
    return std::clamp(table_.integral_to(y), 0.0, 1.0);
  }

 private:
  double gamma_;
  double y_max_;
  double f0_;
  ChebyshevPanels table_;
};

/// Pairs (value, weight) with value = Y and weight = Y, so that
/// (1/count) Σ weight·g(value) estimates E g(W_γ).
struct WeightedSample {
  double value;
  double weight;
};

inline std::vector<WeightedSample> sample_tied_down(const StableFamily& fam, std::uint64_t seed,
                                                    std::size_t count) {
  const auto z = sample_stable(fam, seed, count);
  std::vector<WeightedSample> out(count);
  const double g = fam.gamma();
  for (std::size_t i = 0; i < count; ++i) {
    const double y = std::pow(z[i], -g);
    out[i] = {y, y};
  }
  return out;
}

/// Mean and standard error of (1/count) Σ weight·g(value).
inline MeanStderr weighted_mean(const std::vector<WeightedSample>& sample, const TestFunction& g) {
  std::vector<double> v(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) v[i] = sample[i].weight * g(sample[i].value);
  return mean_stderr(v);
}

}  // namespace tiedown
