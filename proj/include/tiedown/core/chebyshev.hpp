#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"

namespace tiedown {

/// Piecewise Chebyshev interpolant of a smooth function on [lo, hi].
///
/// Each of `panels` equal sub-intervals holds `degree`+1 Chebyshev-Lobatto
/// samples; evaluation uses the barycentric formula. Coefficients of the
/// running integral are kept so that cumulative integrals cost one
/// Clenshaw sum.
class ChebyshevPanels {
 public:
  ChebyshevPanels() = default;

  template <class F>
  ChebyshevPanels(F&& f, double lo, double hi, std::size_t panels, std::size_t degree)
      : lo_(lo), hi_(hi), panels_(panels), degree_(degree) {
    if (!(hi > lo) || panels == 0 || degree < 2) throw DomainError("ChebyshevPanels: bad layout");
    width_ = (hi - lo) / static_cast<double>(panels);
    nodes_.resize(degree + 1);
    for (std::size_t j = 0; j <= degree; ++j)
      nodes_[j] = std::cos(kPi * static_cast<double>(j) / static_cast<double>(degree));
    values_.resize(panels * (degree + 1));
    for (std::size_t p = 0; p < panels; ++p) {
      for (std::size_t j = 0; j <= degree; ++j) values_[p * (degree + 1) + j] = f(map_out(p, nodes_[j]));
    }
    build_integrals();
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  double operator()(double x) const {
    const auto [p, t] = locate(x);
    const double* v = &values_[p * (degree_ + 1)];
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j <= degree_; ++j) {
      const double d = t - nodes_[j];
      if (d == 0.0) return v[j];
      double w = (j % 2 == 0) ? 1.0 : -1.0;
      if (j == 0 || j == degree_) w *= 0.5;
      w /= d;
      num += w * v[j];
      den += w;
    }
    return num / den;
  }

  /// ∫_lo^x of the interpolant.
  double integral_to(double x) const {
    const auto [p, t] = locate(x);
    return panel_base_[p] + 0.5 * width_ * clenshaw(&integral_coeffs_[p * (degree_ + 2)], degree_ + 2, t);
  }

  double total_integral() const { return panel_base_.back(); }

 private:
  double map_out(std::size_t p, double t) const {
    return lo_ + width_ * (static_cast<double>(p) + 0.5 * (t + 1.0));
  }

  std::pair<std::size_t, double> locate(double x) const {
    if (x < lo_ || x > hi_) throw RangeError("ChebyshevPanels: argument outside table");
    double s = (x - lo_) / width_;
    std::size_t p = std::min(static_cast<std::size_t>(s), panels_ - 1);
    double t = 2.0 * (s - static_cast<double>(p)) - 1.0;
    return {p, std::clamp(t, -1.0, 1.0)};
  }

  static double clenshaw(const double* c, std::size_t n, double t) {
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = n; k-- > 1;) {
      const double b0 = 2.0 * t * b1 - b2 + c[k];
      b2 = b1;
      b1 = b0;
    }
    return t * b1 - b2 + c[0];
  }

  void build_integrals() {
    const std::size_t n = degree_;
    integral_coeffs_.assign(panels_ * (n + 2), 0.0);
    panel_base_.assign(panels_ + 1, 0.0);
    std::vector<double> a(n + 1);
    for (std::size_t p = 0; p < panels_; ++p) {
      const double* v = &values_[p * (n + 1)];
      for (std::size_t k = 0; k <= n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
          double w = (j == 0 || j == n) ? 0.5 : 1.0;
          s += w * v[j] * std::cos(kPi * static_cast<double>(k * j) / static_cast<double>(n));
        }
        a[k] = 2.0 * s / static_cast<double>(n);
      }
      a[0] *= 0.5;
      a[n] *= 0.5;
      double* b = &integral_coeffs_[p * (n + 2)];
      // ∫ T_k = T_{k+1}/(2(k+1)) − T_{k−1}/(2(k−1))
      for (std::size_t k = 0; k <= n; ++k) {
        if (k == 0) {
          b[1] += a[0];
        } else if (k == 1) {
          b[2] += a[1] / 4.0;
          b[0] += a[1] / 4.0;
        } else {
          b[k + 1] += a[k] / (2.0 * static_cast<double>(k + 1));
          b[k - 1] -= a[k] / (2.0 * static_cast<double>(k - 1));
        }
      }
      // shift so the antiderivative vanishes at t = −1
      double at_minus = 0.0;
      for (std::size_t k = 0; k < n + 2; ++k) at_minus += (k % 2 == 0 ? 1.0 : -1.0) * b[k];
      b[0] -= at_minus;
      double at_plus = 0.0;
      for (std::size_t k = 0; k < n + 2; ++k) at_plus += b[k];
      panel_base_[p + 1] = panel_base_[p] + 0.5 * width_ * at_plus;
    }
  }

  double lo_ = 0.0;
  double hi_ = 1.0;
  double width_ = 1.0;
  std::size_t panels_ = 0;
  std::size_t degree_ = 0;
  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> integral_coeffs_;
  std::vector<double> panel_base_;
};

}  // namespace tiedown
