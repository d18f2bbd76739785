#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ilcshape/lti.hpp"
#include "ilcshape/signal.hpp"

namespace ilcshape {

struct ReductionResult {
  RationalTf reduced;
  std::vector<double> hankel_singular_values;  // descending
  std::size_t order = 0;
  double error_bound = 0.0;          // 2 Σ_{k>r} σ_k
  double measured_grid_error = 0.0;  // max |C_FIR - C_IIR| over the check grid
  double reduced_spectral_radius = 0.0;
};

struct OrderSelection {
  std::optional<std::size_t> order;  // explicit r wins when set
  double energy_fraction = 0.96;     // smallest r with Σ_{k<=r} σ_k >= η Σ σ_k
};

/// Singular values of the Hankel matrix of the causal Markov parameters
/// h(1..N_c) (the lag-0 tap is feedthrough and excluded), zero-padded to
/// N_c x N_c. Throws when the filter has significant anticausal energy.
std::vector<double> hankel_singular_values(const TwoSidedFir& fir, double anticausal_limit = 1e-6);

std::size_t select_order(const std::vector<double>& sigma, const OrderSelection& selection);

/// Kung realization of order r from the square Hankel of side ceil(N_c/2),
/// converted to a transfer function.
ReductionResult balanced_reduce(const TwoSidedFir& fir, const OrderSelection& selection, double sample_rate_hz = 1.0,
                                std::size_t grid_size = 4096);

/// Characteristic polynomial and C adj(zI - A) B + D a(z) by the
/// Leverrier-Faddeev recursion. A is row-major r x r.
RationalTf state_space_to_tf(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                             double d, double sample_rate_hz);

struct GridError {
  double value = 0.0;
  double db = 0.0;  // -inf when value is 0
  double omega = 0.0;
};

using FrequencyFunction = std::function<Complex(double)>;

/// max_ω |a - b| on (k+1)π/n, k = 0..n-1. DC is skipped because loop gains
/// with an integrator are unbounded there.
GridError grid_hinf_error(const FrequencyFunction& a, const FrequencyFunction& b, std::size_t grid_size = 4096);

}  // namespace ilcshape
