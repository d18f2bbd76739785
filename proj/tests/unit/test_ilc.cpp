#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "ilcshape/errors.hpp"
#include "ilcshape/ilc.hpp"
#include "ilcshape/ilcff.hpp"

using namespace ilcshape;

namespace {

Sequence bump(std::size_t n, double center, double width) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = std::exp(-0.5 * std::pow((static_cast<double>(k) - center) / width, 2));
  return Sequence(std::move(x), 0, 1.0);
}

}  // namespace

TEST_CASE("identity plant with identity filter converges at the first trial") {
  SimulatedPlant plant(RationalTf::gain(1.0));
  const IlcResult r = ilc_run(plant, bump(64, 30, 5), TwoSidedFir({1.0}, 0), {});
  REQUIRE(!r.error_l2_history.empty());
  CHECK(r.error_l2_history[0] == 0.0);
  CHECK(r.iterations_run == 1);
  CHECK(r.error_l2_history.size() == r.iterations_run);
}

TEST_CASE("pure delay with an advance filter converges immediately") {
  for (std::size_t d : {1u, 2u, 5u}) {
    SimulatedPlant plant(RationalTf::delay(d));
    std::vector<double> advance(d + 1, 0.0);
    advance[0] = 1.0;
    const Sequence r = bump(128, 60, 6);
    IlcConfig cfg;
    cfg.max_iterations = 4;
    cfg.stop_error_db = -1000.0;
    const IlcResult res = ilc_run(plant, r, TwoSidedFir(advance, static_cast<Index>(d)), cfg);
    REQUIRE(res.error_l2_history.size() >= 2);
    CHECK(res.error_l2_history[1] <= 1e-15 * l2_norm(r));
  }
}

TEST_CASE("empirical convergence rate") {
  CHECK(empirical_convergence_rate({1.0, 0.5, 0.25}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(empirical_convergence_rate({1.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(empirical_convergence_rate({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(empirical_convergence_rate({1e-20, 1e-21}, 1e-13), std::invalid_argument);

  SimulatedPlant plant(RationalTf::gain(2.0));
  IlcConfig cfg;
  cfg.max_iterations = 6;
  const IlcResult res = ilc_run(plant, bump(32, 16, 3), TwoSidedFir({0.25}, 0), cfg);
  CHECK(std::abs(empirical_convergence_rate(res.error_l2_history) - 0.5) <= 1e-9);
}

TEST_CASE("measured errors follow the error recursion") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int order = 1 + static_cast<int>(rng() % 2);
    const RationalTf p = testing::random_stable_tf(rng, order, static_cast<int>(rng() % (order + 1)));
    const std::size_t n = 32 + rng() % 97;
    const auto taps = testing::random_vector(rng, 1 + rng() % 8, 0.3);
    const TwoSidedFir f(taps, 0);
    const Sequence r(testing::random_vector(rng, n), 0, 1.0);

    SimulatedPlant plant(p);
    IlcConfig cfg;
    cfg.max_iterations = 6;
    cfg.divergence_factor = 1e300;
    IlcLoop loop(plant, r, f, cfg);

    // independent oracle: e_0 = r - P F r, e_{j+1} = e_j - P F e_j, all causal
    auto apply_pf = [&](const std::vector<double>& x) {
      auto fx = testing::brute_convolve(x, taps);
      fx.resize(n);
      return simulate(p, Sequence(fx, 0, 1.0)).values();
    };
    std::vector<double> e = r.values();
    {
      const auto y = apply_pf(e);
      for (std::size_t k = 0; k < n; ++k) e[k] -= y[k];
    }
    for (int j = 0; j <= 5; ++j) {
      loop.step();
      const IlcResult res = loop.result();
      const Sequence measured = linear_combination(1.0, r, -1.0, res.final_output);
      const double scale = std::max(l2_norm(e), 1e-300);
      double diff = 0.0;
      for (std::size_t k = 0; k < n; ++k) diff = std::max(diff, std::abs(measured[k] - e[k]));
      CHECK(diff <= 1e-9 * scale);
      const auto y = apply_pf(e);
      for (std::size_t k = 0; k < n; ++k) e[k] -= y[k];
    }
  }
}

TEST_CASE("error contracts at the rate predicted by the frequency response") {
  const RationalTf p({0.5}, {1.0, -0.5});
  SimulatedPlant plant(p);
  const TwoSidedFir f = initial_learning_filter(impulse_response(p, 64), 0.5);
  double gamma = 0.0;
  for (double w : frequency_grid(8192, true))
    gamma = std::max(gamma, std::abs(1.0 - freq_response(p, w) * f.response(w)));
  REQUIRE(gamma < 1.0);

  const Sequence r = bump(600, 300, 25);
  IlcConfig cfg;
  cfg.max_iterations = 11;
  const IlcResult res = ilc_run(plant, r, f, cfg);
  const double rn = l2_norm(r);
  REQUIRE(res.error_l2_history.size() == 11);
  for (std::size_t j = 0; j < res.error_l2_history.size(); ++j) {
    CHECK(res.error_l2_history[j] <= std::pow(gamma + 0.05, static_cast<double>(j)) * rn);
    if (j > 0) CHECK(res.error_l2_history[j] <= res.error_l2_history[j - 1]);
  }
}

TEST_CASE("reruns are bit-identical and inputs untouched") {
  SimulatedPlant a(testing::servo_plant(1.0));
  SimulatedPlant b(testing::servo_plant(1.0));
  const Sequence r = impulse_response(testing::desired_loop(1.0), 300);
  const Sequence r_copy = r;
  const TwoSidedFir f = initial_learning_filter(measure_impulse(a, 300), 0.5);
  const TwoSidedFir f_copy = f;
  IlcConfig cfg;
  cfg.max_iterations = 5;
  const IlcResult x = ilc_run(a, r, f, cfg);
  const IlcResult y = ilc_run(b, r, f, cfg);
  CHECK(x.error_l2_history == y.error_l2_history);
  CHECK(x.learned_input.values() == y.learned_input.values());
  CHECK(r.values() == r_copy.values());
  CHECK(f.values() == f_copy.values());
}

TEST_CASE("divergence is detected and reports the iteration") {
  SimulatedPlant plant(RationalTf::gain(1.0));
  IlcConfig cfg;
  cfg.max_iterations = 20;
  try {
    ilc_run(plant, bump(32, 16, 3), TwoSidedFir({3.0}, 0), cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() == 4);
  }
}

TEST_CASE("stop threshold and history switch") {
  SimulatedPlant plant(RationalTf::gain(2.0));
  IlcConfig cfg;
  cfg.max_iterations = 50;
  cfg.stop_error_db = -20.0;
  const IlcResult res = ilc_run(plant, bump(32, 16, 3), TwoSidedFir({0.25}, 0), cfg);
  // relative error 0.5^(j+1): first below -20 dB at j = 3
  CHECK(res.iterations_run == 4);
  cfg.record_history = false;
  CHECK(ilc_run(plant, bump(32, 16, 3), TwoSidedFir({0.25}, 0), cfg).error_l2_history.empty());
}

TEST_CASE("learning curve CSV") {
  std::ostringstream os;
  write_learning_curve(os, {1.0, 0.1}, 1.0);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "iteration,error_l2,error_db");
  std::getline(is, line);
  CHECK(line.rfind("0,1.0", 0) == 0);
  std::getline(is, line);
  CHECK(std::stod(line.substr(line.rfind(',') + 1)) == doctest::Approx(-20.0).epsilon(1e-14));
}

TEST_CASE("configuration errors") {
  SimulatedPlant plant(RationalTf::gain(1.0));
  IlcConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(ilc_run(plant, bump(8, 4, 1), TwoSidedFir({1.0}, 0), cfg), std::invalid_argument);
  CHECK_THROWS_AS(ilc_run(plant, Sequence(std::vector<double>(8, 0.0), 0, 1.0), TwoSidedFir({1.0}, 0), {}),
                  std::invalid_argument);
}
