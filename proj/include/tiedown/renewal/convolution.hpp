#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "tiedown/core/error.hpp"
#include "tiedown/core/numeric.hpp"
#include "tiedown/renewal/lattice_law.hpp"

namespace tiedown {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline std::size_t fft_size_for(std::size_t need) {
  std::size_t n = 1;
  while (n < need) n <<= 1;
  return n;
}

/// Linear convolution with a fixed kernel, truncated to a prefix, through a
/// real-to-complex FFT of fixed size. Planned with FFTW_ESTIMATE so results do
/// not depend on timing measurements.
class FftConvolver {
 public:
  FftConvolver(const std::vector<double>& kernel, std::size_t max_input)
      : size_(fft_size_for(kernel.size() + max_input)), bins_(size_ / 2 + 1) {
    buf_ = fftw_alloc_real(size_);
    spec_ = fftw_alloc_complex(bins_);
    kernel_spec_ = fftw_alloc_complex(bins_);
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), buf_, spec_, FFTW_ESTIMATE);
      inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(size_), spec_, buf_, FFTW_ESTIMATE);
    }
    std::fill(buf_, buf_ + size_, 0.0);
    std::copy(kernel.begin(), kernel.end(), buf_);
    fftw_execute(fwd_);
    for (std::size_t b = 0; b < bins_; ++b) {
      kernel_spec_[b][0] = spec_[b][0];
      kernel_spec_[b][1] = spec_[b][1];
    }
  }
  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;
  ~FftConvolver() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
    fftw_free(spec_);
    fftw_free(kernel_spec_);
  }

  /// out[j] = Σ_i in[i]·kernel[j−i] for j < out.size(); negative round-off is clamped.
  void convolve(std::span<const double> in, std::span<double> out) {
    std::fill(buf_, buf_ + size_, 0.0);
    std::copy(in.begin(), in.end(), buf_);
    fftw_execute(fwd_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t b = 0; b < bins_; ++b) {
      const double re = spec_[b][0] * kernel_spec_[b][0] - spec_[b][1] * kernel_spec_[b][1];
      const double im = spec_[b][0] * kernel_spec_[b][1] + spec_[b][1] * kernel_spec_[b][0];
      spec_[b][0] = re * scale;
      spec_[b][1] = im * scale;
    }
    fftw_execute(inv_);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(0.0, buf_[j]);
  }

 private:
  std::size_t size_;
  std::size_t bins_;
  double* buf_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_complex* kernel_spec_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

}  // namespace detail

struct ConvolutionOptions {
  std::size_t memory_limit_bytes = std::size_t{3} << 30;
  /// Rows whose in-range mass falls below this are treated as empty, as are
  /// all later rows.
  double drop_mass = 1e-30;
  /// Lengths up to this use the direct O(L²) product instead of the FFT.
  std::size_t direct_limit = 1024;
};

/// Row k of the J-process: P(J_1+…+J_k = j) for j ≤ JM_k, where
/// φ_k = kξ + p(J_1+…+J_k) and JM_k = ⌊(M − kξ)/p⌋.
struct ConvolutionRow {
  std::int64_t k = 0;
  std::span<const double> probs;
  double overflow = 1.0;  // P(φ_k > M)
};

/// Generates rows k = 1, 2, … up to K (or until the in-range mass drops below
/// options.drop_mass) and hands each to visit(row). Returns the last k visited.
template <class Visit>
std::int64_t stream_convolutions(const LatticeLaw& law, std::int64_t K, std::int64_t M, Visit&& visit,
                                 const ConvolutionOptions& opt = {}) {
  if (K < 1) throw DomainError("convolution_table: K must be positive");
  if (M < 0) throw DomainError("convolution_table: M must be nonnegative");
  const std::int64_t p = law.p();
  const std::int64_t xi = law.xi();
  auto jm = [&](std::int64_t k) -> std::int64_t { return M < k * xi ? -1 : (M - k * xi) / p; };
  const std::int64_t jm1 = jm(1);
  if (jm1 < 0) return 0;
  const auto len1 = static_cast<std::size_t>(jm1 + 1);

  std::vector<double> kernel(len1);
  std::vector<double> tails(len1);
  for (std::size_t j = 0; j < len1; ++j) {
    kernel[j] = law.pmf_j(static_cast<std::int64_t>(j));
    tails[j] = law.tail_j(static_cast<std::int64_t>(j));
  }
  std::vector<double> prev(kernel);
  std::vector<double> next(len1);
  double overflow = law.tail_j(jm1);

  std::unique_ptr<detail::FftConvolver> fft;
  if (len1 > opt.direct_limit) fft = std::make_unique<detail::FftConvolver>(kernel, len1);

  std::int64_t k = 1;
  std::size_t prev_len = len1;
  for (;;) {
    const double in_range = compensated_sum(std::span<const double>(prev.data(), prev_len));
    visit(ConvolutionRow{k, std::span<const double>(prev.data(), prev_len), overflow});
    if (k == K || in_range < opt.drop_mass) break;
    const std::int64_t jmk = jm(k + 1);
    if (jmk < 0) {
      ++k;
      visit(ConvolutionRow{k, {}, 1.0});
      break;
    }
    const auto len = static_cast<std::size_t>(jmk + 1);
    // P(φ_{k+1} > M) = P(J^{(k)} > JM_{k+1}) + Σ_{i ≤ JM_{k+1}} P(J^{(k)} = i) P(J > JM_{k+1} − i)
    CompensatedSum over;
    over.add(overflow);
    for (std::size_t i = len; i < prev_len; ++i) over.add(prev[i]);
    for (std::size_t i = 0; i < len; ++i) over.add(prev[i] * tails[len - 1 - i]);
    if (fft) {
      fft->convolve(std::span<const double>(prev.data(), prev_len), std::span<double>(next.data(), len));
    } else {
      for (std::size_t j = 0; j < len; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i <= j; ++i) s += prev[i] * kernel[j - i];
        next[j] = s;
      }
    }
    std::swap(prev, next);
    prev_len = len;
    overflow = std::min(1.0, over.value());
    ++k;
  }
  return k;
}

/// Exact probabilities P(φ_k = m), k ≤ K, m ≤ M, with the mass beyond M kept
/// per row.
class ConvolutionTable {
 public:
  ConvolutionTable(const LatticeLaw& law, std::int64_t K, std::int64_t M, ConvolutionOptions opt = {})
      : law_(law), K_(K), M_(M) {
    std::size_t bytes = 0;
    last_ = stream_convolutions(
        law, K, M,
        [&](const ConvolutionRow& row) {
          bytes += row.probs.size() * sizeof(double);
          if (bytes > opt.memory_limit_bytes) {
            const double frac = static_cast<double>(opt.memory_limit_bytes) / static_cast<double>(bytes);
            const auto suggested = static_cast<std::uint64_t>(static_cast<double>(M) * std::min(0.9, frac * 0.9));
            throw ResourceError("convolution_table: memory bound exceeded", suggested);
          }
          rows_.emplace_back(row.probs.begin(), row.probs.end());
          overflow_.push_back(row.overflow);
        },
        opt);
  }

  const LatticeLaw& law() const noexcept { return law_; }
  std::int64_t K() const noexcept { return K_; }
  std::int64_t M() const noexcept { return M_; }
  /// Rows beyond this order carry no in-range mass above the drop threshold.
  std::int64_t stored_rows() const noexcept { return static_cast<std::int64_t>(rows_.size()); }

  /// P(φ_k = m).
  double prob(std::int64_t k, std::int64_t m) const {
    if (k < 1 || k > K_) throw RangeError("ConvolutionTable: k outside [1,K]");
    if (m < 0 || m > M_) throw RangeError("ConvolutionTable: m outside [0,M]");
    if (k > stored_rows()) return 0.0;
    const std::int64_t d = m - k * law_.xi();
    if (d < 0 || d % law_.p() != 0) return 0.0;
    const std::int64_t j = d / law_.p();
    const auto& row = rows_[static_cast<std::size_t>(k - 1)];
    return j < static_cast<std::int64_t>(row.size()) ? row[static_cast<std::size_t>(j)] : 0.0;
  }

  /// P(φ_k > M).
  double overflow(std::int64_t k) const {
    if (k < 1 || k > K_) throw RangeError("ConvolutionTable: k outside [1,K]");
    if (k > stored_rows()) return 1.0;
    return overflow_[static_cast<std::size_t>(k - 1)];
  }

  /// Σ_{m ≤ M} P(φ_k = m).
  double row_mass(std::int64_t k) const {
    if (k < 1 || k > K_) throw RangeError("ConvolutionTable: k outside [1,K]");
    if (k > stored_rows()) return 0.0;
    const auto& row = rows_[static_cast<std::size_t>(k - 1)];
    return compensated_sum(row);
  }

  std::span<const double> row_j(std::int64_t k) const {
    if (k < 1 || k > stored_rows()) return {};
    return rows_[static_cast<std::size_t>(k - 1)];
  }

 private:
  LatticeLaw law_;
  std::int64_t K_;
  std::int64_t M_;
  std::int64_t last_ = 0;
  std::vector<std::vector<double>> rows_;
  std::vector<double> overflow_;
};

inline ConvolutionTable convolution_table(const LatticeLaw& law, std::int64_t K, std::int64_t M,
                                          ConvolutionOptions opt = {}) {
  return ConvolutionTable(law, K, M, opt);
}

}  // namespace tiedown
