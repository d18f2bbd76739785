#include "ilcshape/ilc.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ilcshape/errors.hpp"

namespace ilcshape {

namespace {

bool all_finite(const Sequence& x) {
  for (double v : x.samples())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

IlcLoop::IlcLoop(PlantOracle& oracle, Sequence reference, TwoSidedFir learning_filter, IlcConfig config)
    : oracle_(oracle),
      reference_(std::move(reference)),
      filter_(std::move(learning_filter)),
      config_(config),
      reference_norm_(l2_norm(reference_)),
      min_error_(std::numeric_limits<double>::infinity()) {
  if (reference_.empty()) throw std::invalid_argument("ilc: empty reference");
  if (config_.max_iterations < 1) throw std::invalid_argument("ilc: max_iterations must be at least 1");
  if (!(reference_norm_ > 0.0)) throw std::invalid_argument("ilc: reference must be nonzero");
  input_ = filter_on_support(filter_, reference_);
}

bool IlcLoop::step() {
  if (finished_) return false;
  const std::size_t j = iterations_;
  if (!all_finite(input_)) throw DivergenceError(fmt::format("ilc: non-finite input at iteration {}", j), j);
  Sequence y = oracle_.run_trial(input_);
  if (y.size() != reference_.size())
    throw PlantError("ilc: plant output length differs from the reference");
  if (!all_finite(y)) throw DivergenceError(fmt::format("ilc: non-finite output at iteration {}", j), j);

  const Sequence e = linear_combination(1.0, reference_, -1.0, y);
  const double err = l2_norm(e);
  if (config_.record_history) history_.push_back(err);
  ++iterations_;

  // near the rounding floor (about -200 dB and below) the error fluctuates by
  // orders of magnitude between trials; that is noise, not divergence
  const double floor = std::max(min_error_, 1e-10 * reference_norm_);
  if (err > config_.divergence_factor * floor)
    throw DivergenceError(fmt::format("ilc: error {:.3e} exceeds {}x its minimum at iteration {}", err,
                                      config_.divergence_factor, j),
                          j);
  min_error_ = std::min(min_error_, err);

  last_input_ = input_;
  last_output_ = std::move(y);

  const bool below = err == 0.0 || 20.0 * std::log10(err / reference_norm_) < config_.stop_error_db;
  if (below || iterations_ >= config_.max_iterations) {
    finished_ = true;
    return false;
  }
  input_ = linear_combination(1.0, input_, 1.0, filter_on_support(filter_, e));
  return true;
}

IlcResult IlcLoop::result() const {
  IlcResult r;
  r.learned_input = last_input_;
  r.final_output = last_output_;
  r.error_l2_history = history_;
  r.iterations_run = iterations_;
  r.reference_norm = reference_norm_;
  return r;
}

IlcResult ilc_run(PlantOracle& oracle, const Sequence& reference, const TwoSidedFir& learning_filter,
                  const IlcConfig& config) {
  IlcLoop loop(oracle, reference, learning_filter, config);
  while (loop.step()) {
  }
  return loop.result();
}

double empirical_convergence_rate(const std::vector<double>& history, double floor) {
  double log_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t j = 0; j + 1 < history.size(); ++j) {
    const double a = history[j];
    const double b = history[j + 1];
    if (!(a > floor) || !(a > 0.0)) continue;
    if (b == 0.0) return 0.0;
    log_sum += std::log(b / a);
    ++pairs;
  }
  if (pairs == 0) throw std::invalid_argument("empirical_convergence_rate: fewer than 2 usable entries");
  return std::exp(log_sum / static_cast<double>(pairs));
}

void write_learning_curve(std::ostream& os, const std::vector<double>& history, double reference_norm) {
  os << "iteration,error_l2,error_db\n";
  for (std::size_t j = 0; j < history.size(); ++j) {
    const double e = history[j];
    const double db = e > 0.0 && reference_norm > 0.0 ? 20.0 * std::log10(e / reference_norm)
                                                      : -std::numeric_limits<double>::infinity();
    fmt::print(os, "{},{:.17e},{:.17e}\n", j, e, db);
  }
}

}  // namespace ilcshape
