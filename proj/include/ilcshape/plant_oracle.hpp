#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ilcshape/lti.hpp"
#include "ilcshape/signal.hpp"

namespace ilcshape {

// Black-box trial executor. Learning code only ever sees run_trial().
class PlantOracle {
 public:
  explicit PlantOracle(double sample_rate_hz);
  virtual ~PlantOracle() = default;
  PlantOracle(const PlantOracle&) = delete;
  PlantOracle& operator=(const PlantOracle&) = delete;

  /// One trial. Trials are serialized; the output has the input's length,
  /// anchor and sample rate.
  Sequence run_trial(const Sequence& input);

  double sample_rate_hz() const noexcept { return fs_; }
  std::size_t trial_count() const;

 protected:
  virtual std::vector<double> execute(const std::vector<double>& input) = 0;

 private:
  double fs_;
  mutable std::mutex mutex_;
  std::size_t trials_ = 0;
};

// Plant simulated from a transfer function that stays private to the oracle.
class SimulatedPlant final : public PlantOracle {
 public:
  explicit SimulatedPlant(RationalTf tf);

 protected:
  std::vector<double> execute(const std::vector<double>& input) override;

 private:
  RationalTf tf_;
};

// Plant behind a child process speaking the line protocol:
//   request:  "TRIAL <n>" then n samples, one per line
//   response: n samples, one per line
class ProcessPlant final : public PlantOracle {
 public:
  ProcessPlant(std::vector<std::string> argv, double sample_rate_hz);
  ~ProcessPlant() override;

 protected:
  std::vector<double> execute(const std::vector<double>& input) override;

 private:
  void spawn();
  void shutdown() noexcept;

  std::vector<std::string> argv_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;
};

/// Index of the first sample of the delta response whose magnitude exceeds
/// threshold * peak. Throws PlantError on an all-zero response.
int probe_relative_order(PlantOracle& oracle, std::size_t length, double threshold = 1e-8);

/// Delta response measured through the oracle (anchor 0).
Sequence measure_impulse(PlantOracle& oracle, std::size_t length);

}  // namespace ilcshape
