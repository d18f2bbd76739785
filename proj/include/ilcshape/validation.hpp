#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ilcshape/lti.hpp"
#include "ilcshape/signal.hpp"

namespace ilcshape {

struct DesignSpec {
  double rise_time_max_s = 5e-3;
  double settling_time_max_s = 10e-3;
  double overshoot_max_fraction = 0.01;
  double phase_margin_min_deg = 80.0;
  double steady_state_error_max_fraction = 0.02;
  double settling_band_fraction = 0.02;

  void validate() const;
};

struct StepMetrics {
  double rise_time_s = 0.0;
  double settling_time_s = 0.0;
  double overshoot_fraction = 0.0;
  double steady_state_error_fraction = 0.0;
  double final_value = 0.0;
  bool settled = true;  // tail stays inside the band
  double phase_margin_deg = 0.0;
  double gain_crossover_hz = 0.0;
};

struct Margins {
  double phase_margin_deg = 0.0;
  double gain_crossover_hz = 0.0;
};

/// L / (1 + L)
RationalTf closed_loop(const RationalTf& loop);

/// Time-domain metrics of a step response; final value = mean of the last 5%.
StepMetrics step_metrics_from_response(const Sequence& y, double band = 0.02);

/// Simulates the step response of a stable G over horizon_s seconds.
StepMetrics step_metrics(const RationalTf& closed, double horizon_s, double band = 0.02);

/// Unity-feedback step response computed from the loop's impulse response
/// alone (no model), over the impulse response's length.
Sequence closed_loop_step_from_impulse(const Sequence& loop_impulse);

using LoopFrequencyFunction = std::function<Complex(double)>;

/// Gain crossover by bisection on |L| - 1 between bracketing grid points;
/// PM = 180 + unwrapped phase there. With several crossovers the smallest
/// margin is reported. Grid: (k+1)π/n.
Margins stability_margins(const LoopFrequencyFunction& loop, double sample_rate_hz, std::size_t grid_size = 16384);
Margins stability_margins(const RationalTf& loop, std::size_t grid_size = 16384);

struct SpecCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool upper = true;  // measured <= bound when true, measured >= bound otherwise
  bool pass = false;
};

struct SpecReport {
  std::vector<SpecCheck> checks;
  bool pass = false;
};

/// Non-strict comparisons: a metric exactly at its bound passes.
SpecReport check_specs(const StepMetrics& metrics, const DesignSpec& spec);

}  // namespace ilcshape
