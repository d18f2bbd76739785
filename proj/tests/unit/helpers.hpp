#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "ilcshape/lti.hpp"
#include "ilcshape/polynomial.hpp"
#include "ilcshape/signal.hpp"

namespace testing {

using namespace ilcshape;

inline constexpr double kFs = 10000.0;

/// -0.1 (z-0.995)(z-0.99) / ((z-0.4)(z-1)(z-0.998))
inline RationalTf servo_plant(double fs = kFs) {
  return RationalTf({-0.1, 0.1985, -0.098505}, {1.0, -2.398, 1.7972, -0.3992}, fs);
}

/// 0.3 (z-0.9) / ((z-0.999)(z-0.7))
inline RationalTf desired_loop(double fs = kFs) {
  return RationalTf({0.3, -0.27}, {1.0, -1.699, 0.6993}, fs);
}

inline std::vector<double> random_vector(std::mt19937& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

/// Random real polynomial roots inside |z| <= radius, conjugate pairs for complex ones.
inline std::vector<std::complex<double>> random_roots(std::mt19937& rng, int n, double radius) {
  std::uniform_real_distribution<double> mag(0.05, radius);
  std::uniform_real_distribution<double> ang(0.1, 3.0);
  std::vector<std::complex<double>> r;
  while (static_cast<int>(r.size()) < n) {
    if (n - static_cast<int>(r.size()) >= 2 && (rng() & 1u)) {
      const auto z = std::polar(mag(rng), ang(rng));
      r.push_back(z);
      r.push_back(std::conj(z));
    } else {
      const double sign = (rng() & 1u) ? 1.0 : -1.0;
      r.emplace_back(sign * mag(rng), 0.0);
    }
  }
  return r;
}

/// Random stable proper TF with the given number of poles and at most that many zeros.
inline RationalTf random_stable_tf(std::mt19937& rng, int poles, int zeros, double radius = 0.9, double fs = 1.0) {
  std::uniform_real_distribution<double> gain(0.5, 2.0);
  return RationalTf(poly_from_roots(random_roots(rng, zeros, 1.2), gain(rng)), poly_from_roots(random_roots(rng, poles, radius)), fs);
}

/// Direct double-loop convolution.
inline std::vector<double> brute_convolve(const std::vector<double>& x, const std::vector<double>& f) {
  std::vector<double> y(x.size() + f.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j) y[i + j] += x[i] * f[j];
  return y;
}

struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::RowVectorXd c;
  double d = 0.0;
};

// Random stable realization with real eigenvalues in (-0.9, 0.9).
inline StateSpace random_state_space(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> lam(0.1, 0.9);
  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v(i, j) = (i == j ? 2.0 : 0.0) + 0.5 * u(rng);
  Eigen::VectorXd l(n);
  for (int i = 0; i < n; ++i) l[i] = (rng() & 1u ? 1.0 : -1.0) * lam(rng);
  StateSpace s;
  s.a = v * l.asDiagonal() * v.inverse();
  s.b = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
  s.c = Eigen::RowVectorXd::NullaryExpr(n, [&] { return u(rng); });
  s.d = u(rng);
  return s;
}

inline TwoSidedFir markov_fir(const StateSpace& s, std::size_t length) {
  std::vector<double> taps{s.d};
  Eigen::VectorXd x = s.b;
  for (std::size_t k = 1; k < length; ++k) {
    taps.push_back((s.c * x)(0, 0));
    x = s.a * x;
  }
  return TwoSidedFir(std::move(taps), 0);
}

// sqrt(eig(Wc Wo)) with Gramians by fixed-point summation
inline std::vector<double> gramian_sigma(const StateSpace& s) {
  const auto n = s.a.rows();
  Eigen::MatrixXd wc = Eigen::MatrixXd::Zero(n, n), wo = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd ak = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < 2000; ++k) {
    wc += ak * s.b * s.b.transpose() * ak.transpose();
    wo += ak.transpose() * s.c.transpose() * s.c * ak;
    ak = s.a * ak;
  }
  const Eigen::VectorXcd ev = (wc * wo).eigenvalues();
  std::vector<double> sigma;
  for (Eigen::Index i = 0; i < ev.size(); ++i) sigma.push_back(std::sqrt(std::abs(ev[i].real())));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

}  // namespace testing
