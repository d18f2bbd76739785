#include "ilcshape/reduction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "ilcshape/errors.hpp"

namespace ilcshape {

namespace {

std::vector<double> markov_parameters(const TwoSidedFir& fir, double anticausal_limit) {
  const double anticausal = fir.anticausal_energy_fraction();
  if (anticausal > anticausal_limit)
    throw NumericalError(fmt::format("Hankel analysis needs a causal filter; {:.3e} of the energy is anticausal",
                                     anticausal));
  std::vector<double> h;
  for (Index k = 1; k <= fir.max_lag(); ++k) h.push_back(fir.at_lag(k));
  return h;
}

std::vector<double> sorted_magnitudes(const Eigen::VectorXd& eig) {
  std::vector<double> s(static_cast<std::size_t>(eig.size()));
  for (Eigen::Index i = 0; i < eig.size(); ++i) s[static_cast<std::size_t>(i)] = std::abs(eig[i]);
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

}  // namespace

std::vector<double> hankel_singular_values(const TwoSidedFir& fir, double anticausal_limit) {
  const std::vector<double> h = markov_parameters(fir, anticausal_limit);
  const Eigen::Index n = static_cast<Eigen::Index>(h.size());
  if (n == 0) return {};
  // real symmetric Hankel: singular values are the eigenvalue magnitudes
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; i + j < n; ++j) H(i, j) = h[static_cast<std::size_t>(i + j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Hankel eigenvalue decomposition did not converge");
  return sorted_magnitudes(es.eigenvalues());
}

std::size_t select_order(const std::vector<double>& sigma, const OrderSelection& selection) {
  if (selection.order) return std::min(*selection.order, sigma.size());
  const double eta = selection.energy_fraction;
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("select_order: energy fraction must lie in (0, 1]");
  const double total = std::accumulate(sigma.begin(), sigma.end(), 0.0);
  if (total == 0.0) return 0;
  double acc = 0.0;
  for (std::size_t r = 0; r < sigma.size(); ++r) {
    acc += sigma[r];
    if (acc >= eta * total) return r + 1;
  }
  return sigma.size();
}

RationalTf state_space_to_tf(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                             double d, double sample_rate_hz) {
  const std::size_t r = b.size();
  if (a.size() != r * r || c.size() != r) throw std::invalid_argument("state_space_to_tf: dimension mismatch");
  if (r == 0) return RationalTf({d}, {1.0}, sample_rate_hz);
  const Eigen::Index n = static_cast<Eigen::Index>(r);
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = a[static_cast<std::size_t>(i * n + j)];
  const Eigen::Map<const Eigen::VectorXd> B(b.data(), n);
  const Eigen::Map<const Eigen::RowVectorXd> C(c.data(), n);

  Coeffs den(r + 1, 0.0);
  Coeffs num(r + 1, 0.0);
  den[0] = 1.0;
  num[0] = d;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t k = 1; k <= r; ++k) {
    if (k > 1) M = A * M + den[k - 1] * Eigen::MatrixXd::Identity(n, n);
    den[k] = -(A * M).trace() / static_cast<double>(k);
    num[k] = (C * M * B)(0, 0) + d * den[k];
  }
  return RationalTf(std::move(num), std::move(den), sample_rate_hz);
}

GridError grid_hinf_error(const FrequencyFunction& a, const FrequencyFunction& b, std::size_t grid_size) {
  GridError out;
  for (double w : frequency_grid(grid_size, false)) {
    const double e = std::abs(a(w) - b(w));
    if (!(e <= out.value)) {
      out.value = e;
      out.omega = w;
    }
  }
  out.db = out.value > 0.0 ? to_db(out.value) : -std::numeric_limits<double>::infinity();
  return out;
}

ReductionResult balanced_reduce(const TwoSidedFir& fir, const OrderSelection& selection, double sample_rate_hz,
                                std::size_t grid_size) {
  ReductionResult out;
  out.hankel_singular_values = hankel_singular_values(fir);
  const auto& sigma = out.hankel_singular_values;
  out.order = select_order(sigma, selection);
  const std::size_t r = out.order;
  for (std::size_t k = r; k < sigma.size(); ++k) out.error_bound += 2.0 * sigma[k];

  const double d = fir.at_lag(0);
  std::vector<double> a, b, c;
  if (r > 0) {
    const std::vector<double> h = markov_parameters(fir, 1e-6);
    const Eigen::Index nh = static_cast<Eigen::Index>((h.size() + 1) / 2);
    if (static_cast<Eigen::Index>(r) >= nh)
      throw NumericalError(fmt::format("reduction order {} needs more than {} Markov parameters", r, h.size()));
    Eigen::MatrixXd H(nh, nh);
    for (Eigen::Index i = 0; i < nh; ++i)
      for (Eigen::Index j = 0; j < nh; ++j) H(i, j) = h[static_cast<std::size_t>(i + j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw NumericalError("Hankel eigendecomposition did not converge");

    // dominant r eigenpairs by magnitude; H = V diag(λ) V^T = U Σ W^T with U = V, W = V sign(λ)
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(nh));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const auto& lam = es.eigenvalues();
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return std::abs(lam[x]) > std::abs(lam[y]); });
    const Eigen::Index rn = static_cast<Eigen::Index>(r);
    Eigen::MatrixXd V(nh, rn);
    Eigen::VectorXd sq(rn), sgn(rn);
    for (Eigen::Index k = 0; k < rn; ++k) {
      const Eigen::Index i = idx[static_cast<std::size_t>(k)];
      V.col(k) = es.eigenvectors().col(i);
      sq[k] = std::sqrt(std::abs(lam[i]));
      sgn[k] = lam[i] < 0.0 ? -1.0 : 1.0;
      if (!(sq[k] > 0.0)) throw NumericalError("reduction order exceeds the numerical rank of the Hankel matrix");
    }
    const Eigen::MatrixXd O = V * sq.asDiagonal();
    const Eigen::MatrixXd A = O.topRows(nh - 1).completeOrthogonalDecomposition().solve(O.bottomRows(nh - 1));
    const Eigen::VectorXd B = sq.cwiseProduct(sgn).cwiseProduct(V.row(0).transpose());
    const Eigen::RowVectorXd C = O.row(0);

    Eigen::EigenSolver<Eigen::MatrixXd> ev(A, false);
    std::vector<double> mags;
    for (Eigen::Index i = 0; i < rn; ++i) mags.push_back(std::abs(ev.eigenvalues()[i]));
    out.reduced_spectral_radius = *std::max_element(mags.begin(), mags.end());
    if (!(out.reduced_spectral_radius < 1.0))
      throw UnstableSystemError(
          fmt::format("reduced controller is unstable (spectral radius {:.6f})", out.reduced_spectral_radius), mags);

    for (Eigen::Index i = 0; i < rn; ++i)
      for (Eigen::Index j = 0; j < rn; ++j) a.push_back(A(i, j));
    b.assign(B.data(), B.data() + rn);
    c.assign(C.data(), C.data() + rn);
  }
  out.reduced = state_space_to_tf(a, b, c, d, sample_rate_hz);

  // compare against the causal part only; anticausal taps were verified negligible
  std::vector<double> causal;
  for (Index k = 0; k <= fir.max_lag(); ++k) causal.push_back(fir.at_lag(k));
  const TwoSidedFir causal_fir(std::move(causal), 0);
  const RationalTf& reduced = out.reduced;
  out.measured_grid_error =
      grid_hinf_error([&](double w) { return causal_fir.response(w); },
                      [&](double w) { return freq_response(reduced, w); }, grid_size)
          .value;
  return out;
}

}  // namespace ilcshape
