#include "ilcshape/ilcff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ilcshape/errors.hpp"

namespace ilcshape {

void InverseLearnConfig::validate() const {
  if (filter_half_length < 1) throw ConfigError("inverse learning: filter_half_length must be positive");
  if (total_iterations < 1) throw ConfigError("inverse learning: total_iterations must be positive");
  if (cross_update && (cross_update_period < 1 || cross_update_period > total_iterations))
    throw ConfigError("inverse learning: cross_update_period must lie in [1, total_iterations]");
  if (!(initial_gain_alpha > 0.0 && initial_gain_alpha <= 1.0))
    throw ConfigError("inverse learning: initial_gain_alpha must lie in (0, 1]");
}

TwoSidedFir initial_learning_filter(const Sequence& impulse_measurement, double alpha) {
  if (impulse_measurement.empty()) throw PlantError("initial_learning_filter: empty measurement");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("initial_learning_filter: alpha must lie in (0, 1]");
  double peak = 0.0;
  for (double w : frequency_grid(1024, true)) peak = std::max(peak, std::norm(impulse_measurement.dtft(w)));
  if (!(peak > 0.0)) throw PlantError("initial_learning_filter: all-zero impulse measurement");
  const double rho = alpha / peak;

  const auto& x = impulse_measurement.values();
  std::vector<double> taps(x.rbegin(), x.rend());
  for (double& t : taps) t *= rho;
  const Index anchor = static_cast<Index>(x.size()) - 1 - impulse_measurement.anchor();
  return TwoSidedFir(std::move(taps), anchor);
}

InverseLearnResult learn_inverse(PlantOracle& oracle, const InverseLearnConfig& config) {
  config.validate();
  const std::size_t half = config.filter_half_length;
  const std::size_t window = 2 * half;
  const Index center = static_cast<Index>(half);
  const double fs = oracle.sample_rate_hz();

  Sequence reference = delta(window, center, fs);
  if (config.reference_shaping) {
    const auto& s = *config.reference_shaping;
    reference = filter_on_support(zero_phase_lowpass(s.cutoff_normalized, s.half_length), reference);
  }

  const Sequence measurement = measure_impulse(oracle, window);
  IlcConfig ilc;
  ilc.max_iterations = config.total_iterations;
  ilc.stop_error_db = config.stop_error_db;
  IlcLoop loop(oracle, reference, initial_learning_filter(measurement, config.initial_gain_alpha), ilc);
  while (loop.step()) {
    if (config.cross_update && loop.iterations_run() % config.cross_update_period == 0)
      loop.set_learning_filter(TwoSidedFir(loop.current_input().values(), center));
  }
  IlcResult tracking = loop.result();
  TwoSidedFir filter(tracking.learned_input.values(), center);
  return {std::move(filter), std::move(tracking)};
}

}  // namespace ilcshape
