#include "ilcshape/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "ilcshape/errors.hpp"

namespace ilcshape {

void DesignSpec::validate() const {
  if (!(rise_time_max_s > 0 && settling_time_max_s > 0 && overshoot_max_fraction > 0 && phase_margin_min_deg > 0 &&
        steady_state_error_max_fraction > 0))
    throw ConfigError("design spec: all bounds must be positive");
  if (!(settling_band_fraction > 0.0 && settling_band_fraction <= 0.1))
    throw ConfigError("design spec: settling_band_fraction must lie in (0, 0.1]");
}

RationalTf closed_loop(const RationalTf& loop) {
  try {
    return feedback_unity(loop);
  } catch (const std::invalid_argument& e) {
    throw NumericalError(fmt::format("closed_loop: {}", e.what()));
  }
}

namespace {

// first time y reaches level, linearly interpolated between samples
double crossing_time(const std::vector<double>& y, double level, double fs) {
  if (y.empty()) return 0.0;
  const bool rising = level >= 0.0;
  auto reached = [&](double v) { return rising ? v >= level : v <= level; };
  if (reached(y[0])) return 0.0;
  for (std::size_t k = 1; k < y.size(); ++k) {
    if (reached(y[k])) {
      const double frac = (level - y[k - 1]) / (y[k] - y[k - 1]);
      return (static_cast<double>(k - 1) + frac) / fs;
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

StepMetrics step_metrics_from_response(const Sequence& response, double band) {
  if (response.empty()) throw std::invalid_argument("step_metrics: empty response");
  const std::vector<double>& y = response.values();
  const double fs = response.sample_rate_hz();
  const std::size_t n = y.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 20);
  double fv = 0.0;
  for (std::size_t k = n - tail; k < n; ++k) fv += y[k];
  fv /= static_cast<double>(tail);

  StepMetrics m;
  m.final_value = fv;
  m.steady_state_error_fraction = std::abs(1.0 - fv);
  if (fv == 0.0) {
    m.settled = true;
    return m;
  }
  m.rise_time_s = crossing_time(y, 0.9 * fv, fs) - crossing_time(y, 0.1 * fv, fs);
  const double tol = band * std::abs(fv);
  std::optional<std::size_t> last_out;
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(y[k] - fv) > tol) last_out = k;
  m.settling_time_s = last_out ? static_cast<double>(*last_out + 1) / fs : 0.0;
  m.settled = !last_out || *last_out < n - tail;
  const double peak = fv > 0.0 ? *std::max_element(y.begin(), y.end()) : *std::min_element(y.begin(), y.end());
  m.overshoot_fraction = std::max(0.0, (peak - fv) / fv);
  return m;
}

StepMetrics step_metrics(const RationalTf& closed, double horizon_s, double band) {
  const auto p = poles(closed);
  const double radius = spectral_radius(p);
  if (!(radius < 1.0)) {
    std::vector<double> mags;
    for (const auto& z : p) mags.push_back(std::abs(z));
    throw UnstableSystemError(fmt::format("step_metrics: closed loop is unstable (spectral radius {:.6f})", radius),
                              mags);
  }
  const auto n = static_cast<std::size_t>(std::llround(horizon_s * closed.sample_rate_hz()));
  if (n < 2) throw std::invalid_argument("step_metrics: horizon shorter than two samples");
  return step_metrics_from_response(step_response(closed, n), band);
}

Sequence closed_loop_step_from_impulse(const Sequence& loop_impulse) {
  const std::vector<double>& l = loop_impulse.values();
  const std::size_t n = l.size();
  if (n == 0) throw std::invalid_argument("closed_loop_step_from_impulse: empty impulse response");
  if (loop_impulse.anchor() != 0) throw std::invalid_argument("closed_loop_step_from_impulse: response must start at k=0");
  if (1.0 + l[0] == 0.0) throw NumericalError("closed_loop_step_from_impulse: algebraic loop 1 + l(0) = 0");
  // y = l * (1 - y), solved sample by sample
  std::vector<double> y(n), e(n);
  for (std::size_t k = 0; k < n; ++k) {
    double past = 0.0;
    for (std::size_t i = 1; i <= k; ++i) past += l[i] * e[k - i];
    y[k] = (l[0] + past) / (1.0 + l[0]);
    e[k] = 1.0 - y[k];
  }
  return Sequence(std::move(y), 0, loop_impulse.sample_rate_hz());
}

Margins stability_margins(const LoopFrequencyFunction& loop, double sample_rate_hz, std::size_t grid_size) {
  const std::vector<double> grid = frequency_grid(grid_size, false);
  std::vector<double> mag(grid.size()), phase(grid.size());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Complex v = loop(grid[k]);
    mag[k] = std::abs(v);
    double ph = std::arg(v);
    if (k > 0) ph -= two_pi * std::round((ph - phase[k - 1]) / two_pi);
    phase[k] = ph;
  }
  std::optional<Margins> best;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double f0 = mag[k] - 1.0;
    const double f1 = mag[k + 1] - 1.0;
    if ((f0 < 0.0) == (f1 < 0.0)) continue;
    double lo = grid[k], hi = grid[k + 1];
    double flo = f0;
    for (int it = 0; it < 60 && flo != 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = std::abs(loop(mid)) - 1.0;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double wc = flo == 0.0 ? lo : 0.5 * (lo + hi);
    double ph = std::arg(loop(wc));
    ph -= two_pi * std::round((ph - phase[k]) / two_pi);
    double pm = 180.0 + ph * 180.0 / std::numbers::pi;
    pm -= 360.0 * std::floor((pm + 180.0) / 360.0);  // (-180, 180]
    if (pm == -180.0) pm = 180.0;
    const Margins m{pm, wc * sample_rate_hz / two_pi};
    if (!best || m.phase_margin_deg < best->phase_margin_deg) best = m;
  }
  if (!best) throw NumericalError("stability_margins: |L| never crosses 1 on the grid");
  return *best;
}

Margins stability_margins(const RationalTf& loop, std::size_t grid_size) {
  return stability_margins([&](double w) { return freq_response(loop, w); }, loop.sample_rate_hz(), grid_size);
}

SpecReport check_specs(const StepMetrics& m, const DesignSpec& spec) {
  SpecReport report;
  auto add = [&](const char* name, double measured, double bound, bool upper) {
    const bool pass = upper ? measured <= bound : measured >= bound;
    report.checks.push_back({name, measured, bound, upper, pass});
  };
  add("rise_time_s", m.rise_time_s, spec.rise_time_max_s, true);
  add("settling_time_s", m.settling_time_s, spec.settling_time_max_s, true);
  add("overshoot_fraction", m.overshoot_fraction, spec.overshoot_max_fraction, true);
  add("phase_margin_deg", m.phase_margin_deg, spec.phase_margin_min_deg, false);
  add("steady_state_error_fraction", m.steady_state_error_fraction, spec.steady_state_error_max_fraction, true);
  report.pass = std::all_of(report.checks.begin(), report.checks.end(), [](const SpecCheck& c) { return c.pass; });
  return report;
}

}  // namespace ilcshape
