#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ilcshape {

using Index = std::ptrdiff_t;
using Complex = std::complex<double>;

// Finite discrete-time signal. Sample i sits at time index i - anchor.
class Sequence {
 public:
  Sequence() = default;
  Sequence(std::vector<double> samples, Index anchor, double sample_rate_hz);

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }
  Index anchor() const noexcept { return anchor_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  Index first_time() const noexcept { return -anchor_; }
  Index last_time() const noexcept { return static_cast<Index>(samples_.size()) - 1 - anchor_; }

  /// Value at time index k; zero outside the support.
  double at_time(Index k) const noexcept;

  /// Σ x(k) e^{-jωk} over the support.
  Complex dtft(double omega) const;

 private:
  std::vector<double> samples_;
  Index anchor_ = 0;
  double sample_rate_hz_ = 1.0;
};

// FIR filter with causal and anticausal taps; taps[anchor] is the lag-0 tap.
class TwoSidedFir {
 public:
  TwoSidedFir(std::vector<double> taps, Index anchor);

  /// Reinterprets a sequence as filter taps (anchor kept).
  static TwoSidedFir from_sequence(const Sequence& x);

  std::span<const double> taps() const noexcept { return taps_; }
  const std::vector<double>& values() const noexcept { return taps_; }
  Index anchor() const noexcept { return anchor_; }
  std::size_t size() const noexcept { return taps_.size(); }

  Index min_lag() const noexcept { return -anchor_; }
  Index max_lag() const noexcept { return static_cast<Index>(taps_.size()) - 1 - anchor_; }
  double at_lag(Index k) const noexcept;

  /// Σ taps(k) e^{-jω(k-anchor)}.
  Complex response(double omega) const;

  /// Energy of taps at negative lags over total energy (0 for an all-zero filter).
  double anticausal_energy_fraction() const noexcept;

  Sequence to_sequence(double sample_rate_hz) const;

 private:
  std::vector<double> taps_;
  Index anchor_ = 0;
};

Sequence delta(std::size_t length, Index anchor, double sample_rate_hz = 1.0);

/// Full linear convolution; result has len(x)+len(f)-1 samples and keeps
/// time alignment (anchor = x.anchor + f.anchor).
Sequence convolve(const Sequence& x, const TwoSidedFir& f);

/// f applied to x, evaluated only on the support of x. Equivalent to
/// rewindow(convolve(x, f), x.first_time(), x.size()) without the waste.
Sequence filter_on_support(const TwoSidedFir& f, const Sequence& x);

/// Samples of x at times [first_time, first_time + length); the window must
/// contain time 0.
Sequence rewindow(const Sequence& x, Index first_time, std::size_t length);

/// y(k) = x(k - d); the support grows as needed to keep time 0 inside it.
Sequence shift(const Sequence& x, Index d);

/// a*x + b*y on the union of both supports.
Sequence linear_combination(double a, const Sequence& x, double b, const Sequence& y);

double l2_norm(std::span<const double> x) noexcept;
double l2_norm(const Sequence& x) noexcept;
double rms(const Sequence& x) noexcept;
double to_db(double value);

/// Blackman-windowed sinc, symmetric about the anchor, unit DC gain.
/// cutoff_normalized is relative to Nyquist (1 = Nyquist).
TwoSidedFir zero_phase_lowpass(double cutoff_normalized, std::size_t half_length);

/// n uniformly spaced frequencies. With include_dc the grid is k·π/(n-1),
/// otherwise (k+1)·π/n, which skips ω = 0 and ends at π.
std::vector<double> frequency_grid(std::size_t n, bool include_dc);

}  // namespace ilcshape
