#include "ilcshape/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ilcshape {

namespace {

void check_anchor(std::size_t length, Index anchor, const char* what) {
  if (length == 0) {
    if (anchor != 0) throw std::invalid_argument(std::string(what) + ": empty with nonzero anchor");
    return;
  }
  if (anchor < 0 || anchor >= static_cast<Index>(length))
    throw std::invalid_argument(std::string(what) + ": anchor out of range");
}

// Σ x[i] e^{-jω(i-anchor)} by Horner in e^{-jω}; |e^{-jω}| = 1 keeps it stable.
Complex taps_response(const std::vector<double>& x, Index anchor, double omega) {
  const Complex w = std::polar(1.0, -omega);
  Complex acc{0.0, 0.0};
  for (auto it = x.rbegin(); it != x.rend(); ++it) acc = acc * w + *it;
  return acc * std::polar(1.0, omega * static_cast<double>(anchor));
}

}  // namespace

Sequence::Sequence(std::vector<double> samples, Index anchor, double sample_rate_hz)
    : samples_(std::move(samples)), anchor_(anchor), sample_rate_hz_(sample_rate_hz) {
  check_anchor(samples_.size(), anchor_, "Sequence");
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
    throw std::invalid_argument("Sequence: sample rate must be positive");
}

double Sequence::at_time(Index k) const noexcept {
  const Index i = k + anchor_;
  if (i < 0 || i >= static_cast<Index>(samples_.size())) return 0.0;
  return samples_[static_cast<std::size_t>(i)];
}

Complex Sequence::dtft(double omega) const { return taps_response(samples_, anchor_, omega); }

TwoSidedFir::TwoSidedFir(std::vector<double> taps, Index anchor)
    : taps_(std::move(taps)), anchor_(anchor) {
  if (taps_.empty()) throw std::invalid_argument("TwoSidedFir: empty filter");
  check_anchor(taps_.size(), anchor_, "TwoSidedFir");
}

TwoSidedFir TwoSidedFir::from_sequence(const Sequence& x) {
  return TwoSidedFir(x.values(), x.anchor());
}

double TwoSidedFir::at_lag(Index k) const noexcept {
  const Index i = k + anchor_;
  if (i < 0 || i >= static_cast<Index>(taps_.size())) return 0.0;
  return taps_[static_cast<std::size_t>(i)];
}

Complex TwoSidedFir::response(double omega) const { return taps_response(taps_, anchor_, omega); }

double TwoSidedFir::anticausal_energy_fraction() const noexcept {
  double anticausal = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < taps_.size(); ++i) {
    const double e = taps_[i] * taps_[i];
    total += e;
    if (static_cast<Index>(i) < anchor_) anticausal += e;
  }
  return total > 0.0 ? anticausal / total : 0.0;
}

Sequence TwoSidedFir::to_sequence(double sample_rate_hz) const {
  return Sequence(taps_, anchor_, sample_rate_hz);
}

Sequence delta(std::size_t length, Index anchor, double sample_rate_hz) {
  if (length == 0) throw std::invalid_argument("delta: length must be positive");
  if (anchor < 0 || anchor >= static_cast<Index>(length))
    throw std::invalid_argument("delta: anchor out of range");
  std::vector<double> x(length, 0.0);
  x[static_cast<std::size_t>(anchor)] = 1.0;
  return Sequence(std::move(x), anchor, sample_rate_hz);
}

Sequence convolve(const Sequence& x, const TwoSidedFir& f) {
  if (x.empty()) throw std::invalid_argument("convolve: empty input");
  const auto xs = x.samples();
  const auto fs = f.taps();
  std::vector<double> y(xs.size() + fs.size() - 1, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double xi = xs[i];
    if (xi == 0.0) continue;
    double* out = y.data() + i;
    for (std::size_t j = 0; j < fs.size(); ++j) out[j] += xi * fs[j];
  }
  return Sequence(std::move(y), x.anchor() + f.anchor(), x.sample_rate_hz());
}

Sequence filter_on_support(const TwoSidedFir& f, const Sequence& x) {
  if (x.empty()) throw std::invalid_argument("filter_on_support: empty input");
  // y[n] = Σ_j taps[j] · x[n - (j - anchor_f)], all indices in x's sample frame.
  const auto xs = x.samples();
  const auto fs = f.taps();
  const Index n = static_cast<Index>(xs.size());
  const Index af = f.anchor();
  std::vector<double> y(xs.size(), 0.0);
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const double tap = fs[j];
    if (tap == 0.0) continue;
    const Index lag = static_cast<Index>(j) - af;
    const Index lo = std::max<Index>(0, lag);
    const Index hi = std::min<Index>(n, n + lag);
    const double* src = xs.data() - lag;
    for (Index m = lo; m < hi; ++m) y[static_cast<std::size_t>(m)] += tap * src[m];
  }
  return Sequence(std::move(y), x.anchor(), x.sample_rate_hz());
}

Sequence rewindow(const Sequence& x, Index first_time, std::size_t length) {
  if (length == 0 || first_time > 0 || first_time + static_cast<Index>(length) <= 0)
    throw std::invalid_argument("rewindow: window must contain time 0");
  std::vector<double> y(length);
  for (std::size_t i = 0; i < length; ++i) y[i] = x.at_time(first_time + static_cast<Index>(i));
  return Sequence(std::move(y), -first_time, x.sample_rate_hz());
}

Sequence shift(const Sequence& x, Index d) {
  if (x.empty()) return x;
  const Index first = std::min<Index>(x.first_time() + d, 0);
  const Index last = std::max<Index>(x.last_time() + d, 0);
  std::vector<double> y(static_cast<std::size_t>(last - first + 1), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Index t = static_cast<Index>(i) - x.anchor() + d;
    y[static_cast<std::size_t>(t - first)] = x[i];
  }
  return Sequence(std::move(y), -first, x.sample_rate_hz());
}

Sequence linear_combination(double a, const Sequence& x, double b, const Sequence& y) {
  if (x.empty()) return y.empty() ? x : linear_combination(b, y, 0.0, y);
  const Index first = y.empty() ? x.first_time() : std::min(x.first_time(), y.first_time());
  const Index last = y.empty() ? x.last_time() : std::max(x.last_time(), y.last_time());
  std::vector<double> out(static_cast<std::size_t>(last - first + 1));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Index t = first + static_cast<Index>(i);
    out[i] = a * x.at_time(t) + b * y.at_time(t);
  }
  return Sequence(std::move(out), -first, x.sample_rate_hz());
}

double l2_norm(std::span<const double> x) noexcept {
  // scaled accumulation so very small error signals do not underflow
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double acc = 0.0;
  for (double v : x) {
    const double s = v / scale;
    acc += s * s;
  }
  return scale * std::sqrt(acc);
}

double l2_norm(const Sequence& x) noexcept { return l2_norm(x.samples()); }

double rms(const Sequence& x) noexcept {
  if (x.empty()) return 0.0;
  return l2_norm(x) / std::sqrt(static_cast<double>(x.size()));
}

double to_db(double value) {
  if (!(value > 0.0)) throw std::domain_error("to_db: value must be positive");
  return 20.0 * std::log10(value);
}

TwoSidedFir zero_phase_lowpass(double cutoff_normalized, std::size_t half_length) {
  if (!(cutoff_normalized > 0.0 && cutoff_normalized <= 1.0))
    throw std::invalid_argument("zero_phase_lowpass: cutoff must lie in (0, 1]");
  if (half_length == 0) throw std::invalid_argument("zero_phase_lowpass: half_length must be positive");
  constexpr double pi = std::numbers::pi;
  const Index h = static_cast<Index>(half_length);
  const double span = static_cast<double>(h + 1);
  std::vector<double> taps(2 * half_length + 1);
  for (Index k = -h; k <= h; ++k) {
    const double x = cutoff_normalized * static_cast<double>(k);
    const double sinc = k == 0 ? 1.0 : std::sin(pi * x) / (pi * x);
    const double w = 0.42 + 0.5 * std::cos(pi * k / span) + 0.08 * std::cos(2.0 * pi * k / span);
    taps[static_cast<std::size_t>(k + h)] = cutoff_normalized * sinc * w;
  }
  // symmetric pairwise sum keeps the normalization exactly symmetric
  double sum = taps[static_cast<std::size_t>(h)];
  for (Index k = 1; k <= h; ++k) sum += 2.0 * taps[static_cast<std::size_t>(h + k)];
  for (Index k = 0; k <= h; ++k) {
    const double v = taps[static_cast<std::size_t>(h + k)] / sum;
    taps[static_cast<std::size_t>(h + k)] = v;
    taps[static_cast<std::size_t>(h - k)] = v;
  }
  return TwoSidedFir(std::move(taps), h);
}

std::vector<double> frequency_grid(std::size_t n, bool include_dc) {
  if (n == 0) throw std::invalid_argument("frequency_grid: n must be positive");
  std::vector<double> w(n);
  constexpr double pi = std::numbers::pi;
  if (include_dc) {
    if (n == 1) return {0.0};
    for (std::size_t k = 0; k < n; ++k) w[k] = pi * static_cast<double>(k) / static_cast<double>(n - 1);
  } else {
    for (std::size_t k = 0; k < n; ++k) w[k] = pi * static_cast<double>(k + 1) / static_cast<double>(n);
  }
  return w;
}

}  // namespace ilcshape
