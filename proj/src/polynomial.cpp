#include "ilcshape/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ilcshape/errors.hpp"

namespace ilcshape {

using cd = std::complex<double>;

double coeff_norm(const Coeffs& p) noexcept {
  double s = 0.0;
  for (double c : p) s += c * c;
  return std::sqrt(s);
}

Coeffs poly_trim(Coeffs p, double rel_tol) {
  const double thr = rel_tol * coeff_norm(p);
  std::size_t lead = 0;
  while (lead + 1 < p.size() && std::abs(p[lead]) <= thr) ++lead;
  p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(lead));
  if (p.empty()) p.push_back(0.0);
  if (p.size() == 1 && std::abs(p[0]) <= thr) p[0] = 0.0;
  return p;
}

Coeffs poly_mul(const Coeffs& a, const Coeffs& b) {
  if (a.empty() || b.empty()) return {0.0};
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Coeffs poly_add(const Coeffs& a, const Coeffs& b) {
  const std::size_t n = std::max(a.size(), b.size());
  Coeffs out(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return out;
}

Coeffs poly_scale(const Coeffs& a, double s) {
  Coeffs out(a);
  for (double& c : out) c *= s;
  return out;
}

Coeffs poly_shift_up(const Coeffs& a, std::size_t n) {
  Coeffs out(a);
  out.resize(a.size() + n, 0.0);
  return out;
}

cd poly_eval(const Coeffs& p, cd z) noexcept {
  cd acc{0.0, 0.0};
  for (double c : p) acc = acc * z + c;
  return acc;
}

int poly_degree(const Coeffs& p) noexcept {
  std::size_t lead = 0;
  while (lead < p.size() && p[lead] == 0.0) ++lead;
  if (lead == p.size()) return -1;
  return static_cast<int>(p.size() - lead) - 1;
}

Coeffs poly_from_roots(const std::vector<cd>& roots, double leading) {
  std::vector<cd> acc{cd{leading, 0.0}};
  for (const cd& r : roots) {
    std::vector<cd> next(acc.size() + 1, cd{0.0, 0.0});
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= acc[i] * r;
    }
    acc = std::move(next);
  }
  Coeffs out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].real();
  return out;
}

namespace {

// p(z) and p'(z) by Horner.
void eval_with_derivative(const Coeffs& p, cd z, cd& value, cd& deriv) {
  value = cd{0.0, 0.0};
  deriv = cd{0.0, 0.0};
  for (double c : p) {
    deriv = deriv * z + value;
    value = value * z + c;
  }
}

}  // namespace

std::vector<cd> poly_roots(const Coeffs& input, const RootOptions& opts) {
  Coeffs p = poly_trim(input, 0.0);
  if (p.size() == 1 && p[0] == 0.0) throw RootFindingError("poly_roots: zero polynomial", {});
  std::vector<cd> roots;
  while (p.size() > 1 && p.back() == 0.0) {
    p.pop_back();
    roots.emplace_back(0.0, 0.0);
  }
  const std::size_t n = p.size() - 1;
  if (n == 0) return roots;

  const double lead = p[0];
  for (double& c : p) c /= lead;
  const double norm = coeff_norm(p);

  if (n == 1) {
    roots.emplace_back(-p[1], 0.0);
    return roots;
  }

  std::vector<cd> z(n);
  const double radius = std::pow(std::abs(p[n]), 1.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
    z[k] = std::polar(radius, angle);
  }

  std::vector<bool> done(n, false);
  for (int it = 0; it < opts.max_iterations; ++it) {
    bool all_done = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      cd v, d;
      eval_with_derivative(p, z[i], v, d);
      if (v == cd{0.0, 0.0}) {
        done[i] = true;
        continue;
      }
      const cd ratio = v / d;
      cd repulsion{0.0, 0.0};
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) repulsion += 1.0 / (z[i] - z[j]);
      const cd step = ratio / (1.0 - ratio * repulsion);
      z[i] -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z[i])))
        done[i] = true;
      else
        all_done = false;
    }
    if (all_done) break;
  }

  std::vector<double> residuals(n);
  bool ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    cd v, d;
    for (int k = 0; k < 3; ++k) {
      eval_with_derivative(p, z[i], v, d);
      if (d == cd{0.0, 0.0}) break;
      const cd cand = z[i] - v / d;
      if (std::abs(poly_eval(p, cand)) < std::abs(v)) z[i] = cand; else break;
    }
    double res = std::abs(poly_eval(p, z[i]));
    // snap numerically real roots onto the real axis when that costs nothing
    if (std::abs(z[i].imag()) <= 1e-9 * std::max(1.0, std::abs(z[i]))) {
      const cd real_z{z[i].real(), 0.0};
      const double real_res = std::abs(poly_eval(p, real_z));
      if (real_res <= std::max(res, opts.residual_tol * norm * 1e-3)) {
        z[i] = real_z;
        res = real_res;
      }
    }
    // for |z| > 1 the evaluation itself carries rounding of order eps |z|^n,
    // so the residual is measured relative to that scale
    residuals[i] = res / (norm * std::pow(std::max(1.0, std::abs(z[i])), static_cast<double>(n)));
    if (!(residuals[i] < opts.residual_tol)) ok = false;
  }
  if (!ok) throw RootFindingError("poly_roots: iteration did not converge", residuals);

  roots.insert(roots.end(), z.begin(), z.end());
  std::sort(roots.begin(), roots.end(), [](const cd& a, const cd& b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    return a.imag() > b.imag();
  });
  return roots;
}

}  // namespace ilcshape
