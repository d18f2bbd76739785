#pragma once

#include <optional>
#include <utility>

#include "ilcshape/ilc.hpp"
#include "ilcshape/plant_oracle.hpp"
#include "ilcshape/signal.hpp"

namespace ilcshape {

struct LowpassShaping {
  double cutoff_normalized = 0.5;
  std::size_t half_length = 50;
};

struct InverseLearnConfig {
  std::size_t filter_half_length = 2500;
  std::size_t total_iterations = 100;
  std::size_t cross_update_period = 10;
  bool cross_update = true;
  double initial_gain_alpha = 0.5;
  std::optional<LowpassShaping> reference_shaping;
  double stop_error_db = -300.0;

  void validate() const;
};

/// Reverse-time filter: taps are the measurement reversed in time, scaled by
/// alpha / max|P(e^{jω})|^2 over a 1024-point grid.
TwoSidedFir initial_learning_filter(const Sequence& impulse_measurement, double alpha);

struct InverseLearnResult {
  TwoSidedFir filter;
  IlcResult tracking;
};

/// Learns a two-sided FIR approximation of the plant inverse by tracking a
/// (shaped) delta at the center of a 2*half window, periodically replacing the
/// learning filter with the current learned input.
InverseLearnResult learn_inverse(PlantOracle& oracle, const InverseLearnConfig& config);

}  // namespace ilcshape
