#include "ilcshape/loopshape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "ilcshape/errors.hpp"

namespace ilcshape {

void LoopShapeConfig::validate() const {
  if (horizon < 2 || horizon % 2 != 0) throw ConfigError("loop shaping: horizon must be a positive even integer");
  if (!(truncation_threshold > 0.0 && truncation_threshold < 1.0))
    throw ConfigError("loop shaping: truncation_threshold must lie in (0, 1)");
  if (!(slow_pole_radius > 0.0 && slow_pole_radius < 1.0))
    throw ConfigError("loop shaping: slow_pole_radius must lie in (0, 1)");
  if (probe_length < 2) throw ConfigError("loop shaping: probe_length must be at least 2");
  inverse.validate();
  if (ilc.max_iterations < 1) throw ConfigError("loop shaping: ilc max_iterations must be positive");
}

bool is_unity(const RationalTf& tf) noexcept {
  return tf.num().size() == 1 && tf.den().size() == 1 && tf.num()[0] == tf.den()[0];
}

std::pair<int, int> check_assumption_2(PlantOracle& oracle, const RationalTf& target, std::size_t probe_length) {
  if (!target.is_proper()) throw std::invalid_argument("check_assumption_2: desired loop gain must be proper");
  const int plant = probe_relative_order(oracle, probe_length);
  const int wanted = target.relative_order();
  if (wanted < plant)
    throw AssumptionViolation(
        fmt::format("desired loop gain has relative order {} but the plant has {}; the controller would be non-causal",
                    wanted, plant),
        plant, wanted);
  return {plant, wanted};
}

WeightSplit split_frequency_weight(const RationalTf& target, double slow_pole_radius, int min_relative_order) {
  if (!target.is_proper()) throw std::invalid_argument("split_frequency_weight: desired loop gain must be proper");
  const double fs = target.sample_rate_hz();
  std::vector<Complex> slow;
  std::vector<Complex> fast;
  for (const Complex& p : poles(target)) (std::abs(p) >= slow_pole_radius ? slow : fast).push_back(p);

  Coeffs h_num{1.0};
  Coeffs h_den = poly_from_roots(slow);
  Coeffs l_num = target.num();
  Coeffs l_den = poly_from_roots(fast, target.den()[0]);

  const int deg_num = poly_degree(l_num);
  const int rel = static_cast<int>(l_den.size()) - 1 - std::max(deg_num, 0);
  const int need = std::max(0, min_relative_order);
  std::size_t padding = 0;
  if (deg_num >= 0 && rel < need) {
    padding = static_cast<std::size_t>(need - rel);
    l_den = poly_shift_up(l_den, padding);
    h_num = poly_shift_up(h_num, padding);
  }
  return {RationalTf(h_num, h_den, fs), RationalTf(l_num, l_den, fs), padding};
}

TrackingReference build_reference(const RationalTf& target_prime, std::size_t horizon, double truncation_threshold) {
  if (!target_prime.is_proper()) throw std::invalid_argument("build_reference: target must be proper");
  if (horizon < 1) throw std::invalid_argument("build_reference: horizon must be positive");
  const auto p = poles(target_prime);
  const double radius = spectral_radius(p);
  if (radius >= 1.0) {
    std::vector<double> mags;
    for (const auto& z : p) mags.push_back(std::abs(z));
    throw UnstableSystemError(
        "build_reference: target has poles on or outside the unit circle; its impulse response cannot settle "
        "(move those poles into the frequency weight)",
        mags);
  }
  TrackingReference out{impulse_response(target_prime, horizon), {}};
  double peak = 0.0;
  for (double v : out.reference.samples()) peak = std::max(peak, std::abs(v));
  const std::size_t tail = std::max<std::size_t>(1, horizon / 20);
  double tail_peak = 0.0;
  for (std::size_t k = horizon - tail; k < horizon; ++k) tail_peak = std::max(tail_peak, std::abs(out.reference[k]));
  auto& d = out.diagnostics;
  d.tail_ratio = peak > 0.0 ? tail_peak / peak : 0.0;
  d.settled = d.tail_ratio <= truncation_threshold;
  if (!d.settled)
    d.message = fmt::format(
        "reference not settled: tail magnitude is {:.3e} of the peak (threshold {:.1e}); truncation will distort the "
        "controller",
        d.tail_ratio, truncation_threshold);
  return out;
}

std::size_t truncate_tail(std::vector<double>& taps, double threshold, std::size_t min_keep) {
  double peak = 0.0;
  for (double v : taps) peak = std::max(peak, std::abs(v));
  std::size_t keep = taps.size();
  while (keep > min_keep && std::abs(taps[keep - 1]) < threshold * peak) --keep;
  const std::size_t removed = taps.size() - keep;
  taps.resize(keep);
  return removed;
}

TwoSidedFir reconstruct_controller(const TwoSidedFir& c_prime, const RationalTf& weight) {
  if (is_unity(weight)) return c_prime;
  if (!weight.is_proper()) throw std::invalid_argument("reconstruct_controller: improper weight");
  const Sequence y = simulate(weight, c_prime.to_sequence(weight.sample_rate_hz()));
  return TwoSidedFir::from_sequence(y);
}

LoopShapeResult run_loopshaping(PlantOracle& oracle, const RationalTf& target, const LoopShapeConfig& config) {
  config.validate();
  if (std::abs(target.sample_rate_hz() - oracle.sample_rate_hz()) > 1e-12 * oracle.sample_rate_hz())
    throw ConfigError("loop shaping: desired loop gain and plant use different sample rates");
  const auto [plant_order, target_order] = check_assumption_2(oracle, target, config.probe_length);

  InverseLearnResult inverse = learn_inverse(oracle, config.inverse);

  WeightSplit split{RationalTf::gain(1.0, target.sample_rate_hz()), target, 0};
  if (config.frequency_weighting) split = split_frequency_weight(target, config.slow_pole_radius, plant_order);

  TrackingReference ref = build_reference(split.target_prime, config.horizon, config.truncation_threshold);
  const std::size_t margin = config.anticausal_margin;
  std::vector<double> padded(margin, 0.0);
  padded.insert(padded.end(), ref.reference.values().begin(), ref.reference.values().end());
  const Sequence window(std::move(padded), static_cast<Index>(margin), ref.reference.sample_rate_hz());

  IlcResult tracking = ilc_run(oracle, window, inverse.filter, config.ilc);

  // the last plant_order inputs only reach outputs beyond the window
  std::vector<double> c = tracking.learned_input.values();
  const std::size_t unobservable = std::min<std::size_t>(static_cast<std::size_t>(plant_order), c.size() - margin - 1);
  c.resize(c.size() - unobservable);
  const std::size_t dropped = unobservable + truncate_tail(c, config.truncation_threshold, margin + 1);

  TwoSidedFir controller(std::move(c), static_cast<Index>(margin));
  const double anticausal = controller.anticausal_energy_fraction();
  if (anticausal > config.anticausal_energy_limit)
    throw AssumptionViolation(
        fmt::format("learned controller carries {:.3e} of its energy at negative lags; the plant relative order "
                    "was probably mis-measured",
                    anticausal),
        plant_order, target_order);

  LoopShapeResult out{std::move(controller), split.weight, split.target_prime, std::move(ref), std::move(tracking),
                      std::move(inverse), plant_order, target_order, dropped};
  return out;
}

}  // namespace ilcshape
