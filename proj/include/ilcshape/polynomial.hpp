#pragma once

#include <complex>
#include <vector>

namespace ilcshape {

// Real polynomial coefficients in descending powers: p[0] z^n + ... + p[n].
using Coeffs = std::vector<double>;

double coeff_norm(const Coeffs& p) noexcept;

/// Drops leading coefficients with magnitude <= rel_tol * ||p||. Always keeps
/// at least one coefficient; the zero polynomial becomes {0}.
Coeffs poly_trim(Coeffs p, double rel_tol = 1e-14);

Coeffs poly_mul(const Coeffs& a, const Coeffs& b);
Coeffs poly_add(const Coeffs& a, const Coeffs& b);
Coeffs poly_scale(const Coeffs& a, double s);

/// Multiplies by z^n (appends n zeros).
Coeffs poly_shift_up(const Coeffs& a, std::size_t n);

std::complex<double> poly_eval(const Coeffs& p, std::complex<double> z) noexcept;

int poly_degree(const Coeffs& p) noexcept;

/// Monic real polynomial with the given roots. Complex roots must come in
/// conjugate pairs; the imaginary residue of the expansion is discarded.
Coeffs poly_from_roots(const std::vector<std::complex<double>>& roots, double leading = 1.0);

struct RootOptions {
  int max_iterations = 500;
  double residual_tol = 1e-10;  // relative to ||p||_2 * max(1, |z|)^n
};

/// All roots by Aberth-Ehrlich iteration followed by Newton polishing.
/// Throws RootFindingError when any residual stays above the tolerance.
std::vector<std::complex<double>> poly_roots(const Coeffs& p, const RootOptions& opts = {});

}  // namespace ilcshape
