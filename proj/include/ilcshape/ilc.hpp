#pragma once

#include <iosfwd>
#include <vector>

#include "ilcshape/plant_oracle.hpp"
#include "ilcshape/signal.hpp"

namespace ilcshape {

struct IlcConfig {
  std::size_t max_iterations = 10;
  double stop_error_db = -300.0;  // relative l2 error; -300 effectively never stops
  bool record_history = true;
  double divergence_factor = 10.0;
};

struct IlcResult {
  Sequence learned_input;  // input of the last trial
  Sequence final_output;   // output of the last trial
  std::vector<double> error_l2_history;  // one entry per trial (when recorded)
  std::size_t iterations_run = 0;
  double reference_norm = 0.0;
};

// u0 = F r, u_{j+1} = u_j + F (r - y_j), everything windowed to the support of r.
class IlcLoop {
 public:
  IlcLoop(PlantOracle& oracle, Sequence reference, TwoSidedFir learning_filter, IlcConfig config);

  /// Runs one trial and the subsequent update. Returns false once the loop
  /// has stopped (iteration cap or error threshold reached).
  bool step();

  void set_learning_filter(TwoSidedFir filter) { filter_ = std::move(filter); }
  const TwoSidedFir& learning_filter() const noexcept { return filter_; }
  const Sequence& current_input() const noexcept { return input_; }
  const Sequence& reference() const noexcept { return reference_; }
  std::size_t iterations_run() const noexcept { return iterations_; }
  bool finished() const noexcept { return finished_; }

  IlcResult result() const;

 private:
  PlantOracle& oracle_;
  Sequence reference_;
  TwoSidedFir filter_;
  IlcConfig config_;
  double reference_norm_;
  double min_error_;
  Sequence input_;
  Sequence last_input_;
  Sequence last_output_;
  std::vector<double> history_;
  std::size_t iterations_ = 0;
  bool finished_ = false;
};

IlcResult ilc_run(PlantOracle& oracle, const Sequence& reference, const TwoSidedFir& learning_filter,
                  const IlcConfig& config);

/// Geometric mean of e_{j+1}/e_j over pairs whose first entry is above floor.
/// A zero successor gives rate 0.
double empirical_convergence_rate(const std::vector<double>& history, double floor = 0.0);

/// CSV: iteration,error_l2,error_db (dB relative to reference_norm).
void write_learning_curve(std::ostream& os, const std::vector<double>& history, double reference_norm);

}  // namespace ilcshape
