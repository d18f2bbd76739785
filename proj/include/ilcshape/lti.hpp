#pragma once

#include <complex>
#include <vector>

#include "ilcshape/polynomial.hpp"
#include "ilcshape/signal.hpp"

namespace ilcshape {

// Discrete transfer function num(z)/den(z), coefficients in descending powers of z.
class RationalTf {
 public:
  RationalTf() : RationalTf({1.0}, {1.0}, 1.0) {}
  RationalTf(Coeffs num, Coeffs den, double sample_rate_hz = 1.0);

  static RationalTf gain(double k, double sample_rate_hz = 1.0);
  /// z^{-d}
  static RationalTf delay(std::size_t d, double sample_rate_hz = 1.0);

  const Coeffs& num() const noexcept { return num_; }
  const Coeffs& den() const noexcept { return den_; }
  double sample_rate_hz() const noexcept { return fs_; }

  int num_degree() const noexcept;
  int den_degree() const noexcept { return static_cast<int>(den_.size()) - 1; }
  /// deg(den) - deg(num); negative for improper transfer functions.
  int relative_order() const noexcept;
  bool is_proper() const noexcept { return relative_order() >= 0; }
  bool is_zero() const noexcept { return num_degree() < 0; }

  Complex evaluate(Complex z) const noexcept;

 private:
  Coeffs num_;
  Coeffs den_;
  double fs_;
};

/// Zero-initial-condition difference equation over the input's samples.
Sequence simulate(const RationalTf& tf, const Sequence& input);
Sequence impulse_response(const RationalTf& tf, std::size_t length);
Sequence step_response(const RationalTf& tf, std::size_t length);

/// num/den at e^{jω}; throws PoleOnGridError when the denominator vanishes.
std::vector<Complex> freq_response(const RationalTf& tf, const std::vector<double>& grid);
Complex freq_response(const RationalTf& tf, double omega);

RationalTf series(const RationalTf& a, const RationalTf& b);
/// Series connection assembled from the factors' own roots, cancelling
/// pole/zero pairs closer than tol * max(1, |p|). Rooting each factor
/// separately avoids the clustered-root error of rooting the expanded product.
RationalTf series_minimal(const RationalTf& a, const RationalTf& b, double tol = 1e-6);

/// a / b
RationalTf divide(const RationalTf& a, const RationalTf& b);
/// L / (1 + L)
RationalTf feedback_unity(const RationalTf& loop);
/// Removes z factors common to numerator and denominator and renormalizes so
/// the leading denominator coefficient is 1.
RationalTf cancel_common_z(const RationalTf& tf);

std::vector<Complex> poles(const RationalTf& tf);
std::vector<Complex> zeros(const RationalTf& tf);
double spectral_radius(const std::vector<Complex>& roots) noexcept;

}  // namespace ilcshape
