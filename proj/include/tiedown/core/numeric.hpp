#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace tiedown {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Neumaier-compensated running sum. Adding the same terms in the same order
/// always reproduces the same bits.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// log(1 + w) for complex w, accurate when |w| is tiny.
inline std::complex<double> complex_log1p(std::complex<double> w) {
  const double re = w.real();
  const double im = w.imag();
  const double mod = 0.5 * std::log1p(2.0 * re + re * re + im * im);
  const double arg = std::atan2(im, 1.0 + re);
  return {mod, arg};
}

/// e^{i theta} - 1 without cancellation.
inline std::complex<double> expm1_i(double theta) {
  const double s = std::sin(0.5 * theta);
  return {-2.0 * s * s, std::sin(theta)};
}

/// Ordinary least-squares slope and intercept of y on x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

/// Mean and standard error of the mean.
struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  CompensatedSum v;
  for (double x : xs) v.add((x - mean) * (x - mean));
  const double var = xs.size() > 1 ? v.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

/// Kolmogorov distance between the empirical law of `values` and a CDF.
template <class Cdf>
double ks_distance(std::vector<double> values, Cdf&& cdf) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double F = cdf(values[i]);
    d = std::max(d, std::max(std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(j) / n)));
    i = j;
  }
  return d;
}

}  // namespace tiedown
