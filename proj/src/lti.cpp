#include "ilcshape/lti.hpp"

#include <cmath>
#include <stdexcept>

#include "ilcshape/errors.hpp"

namespace ilcshape {

namespace {

void require_same_rate(double a, double b, const char* what) {
  if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)))
    throw std::invalid_argument(std::string(what) + ": sample-rate mismatch");
}

}  // namespace

RationalTf::RationalTf(Coeffs num, Coeffs den, double sample_rate_hz)
    : num_(poly_trim(std::move(num), 0.0)), den_(poly_trim(std::move(den), 0.0)), fs_(sample_rate_hz) {
  if (den_.empty() || den_[0] == 0.0) throw std::invalid_argument("RationalTf: zero denominator");
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) throw std::invalid_argument("RationalTf: sample rate must be positive");
  for (double c : num_)
    if (!std::isfinite(c)) throw std::invalid_argument("RationalTf: non-finite numerator");
  for (double c : den_)
    if (!std::isfinite(c)) throw std::invalid_argument("RationalTf: non-finite denominator");
}

RationalTf RationalTf::gain(double k, double sample_rate_hz) { return RationalTf({k}, {1.0}, sample_rate_hz); }

RationalTf RationalTf::delay(std::size_t d, double sample_rate_hz) {
  Coeffs den(d + 1, 0.0);
  den[0] = 1.0;
  return RationalTf({1.0}, std::move(den), sample_rate_hz);
}

int RationalTf::num_degree() const noexcept { return poly_degree(num_); }

int RationalTf::relative_order() const noexcept {
  const int nd = num_degree();
  return nd < 0 ? den_degree() : den_degree() - nd;
}

Complex RationalTf::evaluate(Complex z) const noexcept { return poly_eval(num_, z) / poly_eval(den_, z); }

Sequence simulate(const RationalTf& tf, const Sequence& input) {
  if (!tf.is_proper()) throw std::invalid_argument("simulate: improper transfer function");
  require_same_rate(tf.sample_rate_hz(), input.sample_rate_hz(), "simulate");
  const std::size_t n = static_cast<std::size_t>(tf.den_degree());
  // numerator aligned to the denominator's length: b[0..n]
  Coeffs b(n + 1, 0.0);
  const Coeffs& num = tf.num();
  for (std::size_t i = 0; i < num.size() && i <= n; ++i) b[n + 1 - num.size() + i] = num[i];
  const double a0 = tf.den()[0];
  Coeffs a(tf.den());
  for (double& c : a) c /= a0;
  for (double& c : b) c /= a0;

  const auto x = input.samples();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    double acc = 0.0;
    const std::size_t m = std::min(n, k);
    for (std::size_t i = 0; i <= m; ++i) acc += b[i] * x[k - i];
    for (std::size_t i = 1; i <= m; ++i) acc -= a[i] * y[k - i];
    y[k] = acc;
  }
  return Sequence(std::move(y), input.anchor(), input.sample_rate_hz());
}

Sequence impulse_response(const RationalTf& tf, std::size_t length) {
  return simulate(tf, delta(length, 0, tf.sample_rate_hz()));
}

Sequence step_response(const RationalTf& tf, std::size_t length) {
  if (length == 0) throw std::invalid_argument("step_response: length must be positive");
  return simulate(tf, Sequence(std::vector<double>(length, 1.0), 0, tf.sample_rate_hz()));
}

Complex freq_response(const RationalTf& tf, double omega) {
  const Complex z = std::polar(1.0, omega);
  const Complex d = poly_eval(tf.den(), z);
  if (std::abs(d) <= 1e-14 * coeff_norm(tf.den()))
    throw PoleOnGridError("freq_response: pole on the unit circle at the requested frequency", omega);
  return poly_eval(tf.num(), z) / d;
}

std::vector<Complex> freq_response(const RationalTf& tf, const std::vector<double>& grid) {
  std::vector<Complex> out;
  out.reserve(grid.size());
  for (double w : grid) out.push_back(freq_response(tf, w));
  return out;
}

RationalTf cancel_common_z(const RationalTf& tf) {
  Coeffs num = tf.num();
  Coeffs den = tf.den();
  while (num.size() > 1 && den.size() > 1 && num.back() == 0.0 && den.back() == 0.0) {
    num.pop_back();
    den.pop_back();
  }
  const double a0 = den[0];
  return RationalTf(poly_scale(num, 1.0 / a0), poly_scale(den, 1.0 / a0), tf.sample_rate_hz());
}

RationalTf series(const RationalTf& a, const RationalTf& b) {
  require_same_rate(a.sample_rate_hz(), b.sample_rate_hz(), "series");
  return cancel_common_z(RationalTf(poly_trim(poly_mul(a.num(), b.num())),
                                    poly_trim(poly_mul(a.den(), b.den())), a.sample_rate_hz()));
}

RationalTf series_minimal(const RationalTf& a, const RationalTf& b, double tol) {
  require_same_rate(a.sample_rate_hz(), b.sample_rate_hz(), "series_minimal");
  if (a.is_zero() || b.is_zero()) return RationalTf({0.0}, {1.0}, a.sample_rate_hz());
  auto lead = [](const Coeffs& p) { return p[static_cast<std::size_t>(static_cast<int>(p.size()) - 1 - poly_degree(p))]; };
  const double gain = lead(a.num()) / a.den()[0] * lead(b.num()) / b.den()[0];
  std::vector<Complex> zs = zeros(a);
  for (const auto& z : zeros(b)) zs.push_back(z);
  std::vector<Complex> ps = poles(a);
  for (const auto& p : poles(b)) ps.push_back(p);

  for (std::size_t i = 0; i < ps.size();) {
    std::size_t best = zs.size();
    double best_dist = 0.0;
    for (std::size_t j = 0; j < zs.size(); ++j) {
      const double dist = std::abs(zs[j] - ps[i]);
      if (dist <= tol * std::max(1.0, std::abs(ps[i])) && (best == zs.size() || dist < best_dist)) {
        best = j;
        best_dist = dist;
      }
    }
    if (best < zs.size()) {
      zs.erase(zs.begin() + static_cast<std::ptrdiff_t>(best));
      ps.erase(ps.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return RationalTf(poly_from_roots(zs, gain), poly_from_roots(ps), a.sample_rate_hz());
}

RationalTf divide(const RationalTf& a, const RationalTf& b) {
  require_same_rate(a.sample_rate_hz(), b.sample_rate_hz(), "divide");
  if (b.is_zero()) throw std::invalid_argument("divide: division by the zero transfer function");
  return cancel_common_z(RationalTf(poly_trim(poly_mul(a.num(), b.den())),
                                    poly_trim(poly_mul(a.den(), b.num())), a.sample_rate_hz()));
}

RationalTf feedback_unity(const RationalTf& loop) {
  Coeffs den = poly_trim(poly_add(loop.den(), loop.num()));
  if (den.size() == 1 && den[0] == 0.0) throw std::invalid_argument("feedback_unity: 1 + L is identically zero");
  return cancel_common_z(RationalTf(loop.num(), std::move(den), loop.sample_rate_hz()));
}

std::vector<Complex> poles(const RationalTf& tf) { return poly_roots(tf.den()); }

std::vector<Complex> zeros(const RationalTf& tf) {
  if (tf.is_zero()) return {};
  return poly_roots(tf.num());
}

double spectral_radius(const std::vector<Complex>& roots) noexcept {
  double r = 0.0;
  for (const auto& z : roots) r = std::max(r, std::abs(z));
  return r;
}

}  // namespace ilcshape
