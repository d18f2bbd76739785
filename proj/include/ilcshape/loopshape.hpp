#pragma once

#include <string>
#include <utility>

#include "ilcshape/ilc.hpp"
#include "ilcshape/ilcff.hpp"
#include "ilcshape/lti.hpp"
#include "ilcshape/plant_oracle.hpp"

namespace ilcshape {

struct LoopShapeConfig {
  std::size_t horizon = 5000;
  double truncation_threshold = 1e-10;
  double slow_pole_radius = 0.995;
  bool frequency_weighting = true;
  std::size_t anticausal_margin = 8;  // zero-padding before time 0 in the tracking window
  std::size_t probe_length = 1024;
  double anticausal_energy_limit = 1e-6;
  InverseLearnConfig inverse;
  IlcConfig ilc;

  void validate() const;
};

struct WeightSplit {
  RationalTf weight;        // H
  RationalTf target_prime;  // L_d' with H * L_d' = L_d
  std::size_t padding = 0;  // z^n moved from L_d' into H
};

struct ReferenceDiagnostics {
  double tail_ratio = 0.0;  // max |x(k)| over the last 5% relative to the peak
  bool settled = true;      // tail_ratio <= truncation threshold
  std::string message;
};

struct TrackingReference {
  Sequence reference;
  ReferenceDiagnostics diagnostics;
};

struct LoopShapeResult {
  TwoSidedFir controller_fir;  // c'(k) (equal to c(k) when H = 1)
  RationalTf weight;
  RationalTf target_prime;
  TrackingReference reference;
  IlcResult tracking;
  InverseLearnResult inverse;
  int relative_order_plant = 0;
  int relative_order_target = 0;
  std::size_t taps_dropped = 0;
};

/// Probes the plant and compares relative orders; throws AssumptionViolation
/// when the target's order is below the plant's.
std::pair<int, int> check_assumption_2(PlantOracle& oracle, const RationalTf& target, std::size_t probe_length = 1024);

/// Moves poles with |p| >= radius into H. L_d' is padded with z^{-n} (and H
/// with z^n) until its relative order reaches max(0, min_relative_order).
WeightSplit split_frequency_weight(const RationalTf& target, double slow_pole_radius, int min_relative_order = 0);

TrackingReference build_reference(const RationalTf& target_prime, std::size_t horizon, double truncation_threshold);

LoopShapeResult run_loopshaping(PlantOracle& oracle, const RationalTf& target, const LoopShapeConfig& config);

/// c(k) = H(z) c'(k) over the support of c'.
TwoSidedFir reconstruct_controller(const TwoSidedFir& c_prime, const RationalTf& weight);

/// Removes trailing taps below threshold * max|tap|, keeping at least
/// min_keep taps. Returns the number removed.
std::size_t truncate_tail(std::vector<double>& taps, double threshold, std::size_t min_keep = 1);

bool is_unity(const RationalTf& tf) noexcept;

}  // namespace ilcshape
