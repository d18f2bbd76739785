#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "ilcshape/errors.hpp"
#include "ilcshape/loopshape.hpp"

using namespace ilcshape;

namespace {

bool same_response(const RationalTf& a, const RationalTf& b, double tol) {
  for (double w : frequency_grid(512, true)) {
    const Complex x = freq_response(a, w);
    const Complex y = freq_response(b, w);
    if (std::abs(x - y) > tol * std::max(1.0, std::abs(y))) return false;
  }
  return true;
}

LoopShapeConfig small_config(std::size_t horizon, std::size_t half) {
  LoopShapeConfig cfg;
  cfg.horizon = horizon;
  cfg.inverse.filter_half_length = half;
  cfg.inverse.total_iterations = 60;
  cfg.probe_length = 64;
  return cfg;
}

}  // namespace

TEST_CASE("relative order gate") {
  SimulatedPlant d2(RationalTf::delay(2));
  try {
    check_assumption_2(d2, RationalTf({1.0}, {1.0, -0.5}));
    FAIL("expected a violation");
  } catch (const AssumptionViolation& e) {
    CHECK(e.plant_order() == 2);
    CHECK(e.target_order() == 1);
  }
  SimulatedPlant servo(testing::servo_plant());
  CHECK(check_assumption_2(servo, testing::desired_loop()) == std::pair{1, 1});
  SimulatedPlant bi(RationalTf({1.0, -0.5}, {1.0, -0.2}));
  CHECK(check_assumption_2(bi, RationalTf({2.0, 1.0}, {1.0, 0.1})).first == 0);
  CHECK(check_assumption_2(bi, RationalTf({1.0}, {1.0, 0.1, 0.0})).first == 0);
}

TEST_CASE("weight split examples") {
  const RationalTf ld = testing::desired_loop();
  const WeightSplit s = split_frequency_weight(ld, 0.995);
  CHECK(s.padding == 0);
  CHECK(same_response(s.weight, RationalTf({1.0}, {1.0, -0.999}, ld.sample_rate_hz()), 1e-12));
  CHECK(same_response(s.target_prime, RationalTf({0.3, -0.27}, {1.0, -0.7}, ld.sample_rate_hz()), 1e-12));
  CHECK(same_response(series(s.weight, s.target_prime), ld, 1e-10));

  const RationalTf fast({1.0}, {1.0, -0.5});
  const WeightSplit none = split_frequency_weight(fast, 0.995);
  CHECK(is_unity(none.weight));
  CHECK(none.target_prime.num() == fast.num());
  CHECK(none.target_prime.den() == fast.den());

  const RationalTf integ({1.0, -0.5}, poly_mul({1.0, -1.0}, {1.0, -0.9}));
  const WeightSplit a = split_frequency_weight(integ, 0.95);
  CHECK(a.padding == 0);
  CHECK(a.target_prime.relative_order() == 0);
  CHECK(a.weight.den_degree() == 1);
  CHECK(std::abs(a.weight.den()[1] + 1.0) < 1e-12);

  const WeightSplit b = split_frequency_weight(integ, 0.85);
  CHECK(b.padding == 1);
  CHECK(b.target_prime.relative_order() == 0);
  for (double w : {0.3, 1.2}) {
    const Complex z = std::polar(1.0, w);
    CHECK(std::abs(freq_response(b.target_prime, w) - (z - 0.5) / z) < 1e-12);
    CHECK(std::abs(freq_response(b.weight, w) - z / ((z - 1.0) * (z - 0.9))) < 1e-10);
  }
}

TEST_CASE("split identity on random targets, including padded cases") {
  std::mt19937 rng(51);
  int padded = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int order = 1 + static_cast<int>(rng() % 4);
    const RationalTf ld = testing::random_stable_tf(rng, order, static_cast<int>(rng() % (order + 1)), 0.99);
    // every third case uses a radius below all poles so everything moves into H
    const double radius = trial % 3 == 0 ? 0.01 : 0.6;
    const int min_order = static_cast<int>(rng() % 3);
    const WeightSplit s = split_frequency_weight(ld, radius, min_order);
    if (s.padding > 0) ++padded;
    CHECK(s.target_prime.relative_order() >= min_order);
    for (const auto& p : poles(s.target_prime))
      if (std::abs(p) > 0.0) CHECK(std::abs(p) < radius);
    CHECK(same_response(series(s.weight, s.target_prime), ld, 1e-10));
  }
  CHECK(padded > 0);
}

TEST_CASE("tracking reference") {
  const TrackingReference d = build_reference(RationalTf::delay(1), 8, 1e-10);
  CHECK(d.reference.values() == std::vector<double>{0, 1, 0, 0, 0, 0, 0, 0});
  CHECK(d.diagnostics.settled);

  const TrackingReference slow = build_reference(testing::desired_loop(), 5000, 1e-10);
  const double slow_coeff = 0.3 * (0.999 - 0.9) / (0.999 - 0.7);
  CHECK(!slow.diagnostics.settled);
  CHECK(!slow.diagnostics.message.empty());
  CHECK(slow.diagnostics.tail_ratio == doctest::Approx(slow_coeff * std::pow(0.999, 4749) / 0.3).epsilon(1e-3));

  const TrackingReference quick = build_reference(RationalTf({0.3, -0.27}, {1.0, -0.7}), 200, 1e-10);
  CHECK(quick.diagnostics.settled);
  CHECK(quick.diagnostics.tail_ratio < 1e-15);

  CHECK_THROWS_AS(build_reference(RationalTf({1.0}, {1.0, -1.0}), 100, 1e-10), UnstableSystemError);
}

TEST_CASE("identity plant learns the target itself") {
  SimulatedPlant plant(RationalTf::gain(1.0));
  const LoopShapeResult r = run_loopshaping(plant, RationalTf::delay(1), small_config(64, 32));
  CHECK(r.controller_fir.at_lag(1) == doctest::Approx(1.0).epsilon(1e-12));
  double others = 0.0;
  for (Index k = r.controller_fir.min_lag(); k <= r.controller_fir.max_lag(); ++k)
    if (k != 1) others = std::max(others, std::abs(r.controller_fir.at_lag(k)));
  CHECK(others < 1e-12);
  CHECK(r.tracking.error_l2_history.back() < 1e-12);
}

TEST_CASE("first-order plant matches exact division") {
  const RationalTf p({1.0}, {1.0, -0.5});
  const RationalTf ld({1.0}, poly_mul({1.0, -0.5}, {1.0, -0.2}));
  SimulatedPlant plant(p);
  const LoopShapeResult r = run_loopshaping(plant, ld, small_config(200, 64));
  CHECK(r.relative_order_plant == 1);
  CHECK(r.relative_order_target == 2);
  const Sequence oracle = impulse_response(RationalTf({1.0}, {1.0, -0.2}), 200);
  double err = 0.0;
  for (Index k = 0; k < 150; ++k) err = std::max(err, std::abs(r.controller_fir.at_lag(k) - oracle[k]));
  CHECK(err < 1e-8);
}

TEST_CASE("plant driven by the learned controller reproduces the target") {
  const RationalTf p({0.2, -0.12}, poly_mul({1.0, -0.3}, {1.0, -0.8}));
  const RationalTf ld({0.3, -0.27}, poly_mul({1.0, -0.9}, {1.0, -0.7}));
  SimulatedPlant plant(p);
  const LoopShapeResult r = run_loopshaping(plant, ld, small_config(400, 200));
  const Sequence y = simulate(p, r.controller_fir.to_sequence(1.0));
  const Sequence target = impulse_response(ld, 400);
  const double final_error = r.tracking.error_l2_history.back();
  double diff = 0.0;
  for (Index k = 0; k < 400; ++k) diff += std::pow(y.at_time(k) - target[static_cast<std::size_t>(k)], 2);
  // truncated taps contribute at most sqrt(dropped) * threshold * max|c| * ||p||_1
  double peak = 0.0;
  for (double t : r.controller_fir.taps()) peak = std::max(peak, std::abs(t));
  double p_l1 = 0.0;
  for (double v : impulse_response(p, 400).samples()) p_l1 += std::abs(v);
  const double budget = std::sqrt(static_cast<double>(r.taps_dropped)) * 1e-10 * peak * p_l1;
  CHECK(std::sqrt(diff) <= final_error + budget);
  CHECK(r.controller_fir.anticausal_energy_fraction() < 1e-6);
}

TEST_CASE("controller reconstruction") {
  const TwoSidedFir c({0.0, 1.0, 0.5, 0.25}, 1);
  const TwoSidedFir same = reconstruct_controller(c, RationalTf::gain(1.0));
  CHECK(same.values() == c.values());
  CHECK(same.anchor() == c.anchor());

  const TwoSidedFir shifted = reconstruct_controller(c, RationalTf::delay(1));
  // the reconstruction keeps the support of c'
  CHECK(shifted.size() == c.size());
  for (Index k = -1; k <= 2; ++k) CHECK(shifted.at_lag(k) == c.at_lag(k - 1));

  const TwoSidedFir d({1.0, 0.0, 0.0, 0.0, 0.0, 0.0}, 0);
  const TwoSidedFir g = reconstruct_controller(d, RationalTf({1.0}, {1.0, -0.999}));
  CHECK(g.at_lag(0) == 0.0);
  for (Index k = 1; k <= 5; ++k) CHECK(g.at_lag(k) == doctest::Approx(std::pow(0.999, k - 1)).epsilon(1e-14));
  CHECK_THROWS(reconstruct_controller(d, RationalTf({1.0, 0.0}, {1.0})));
}

TEST_CASE("tail truncation stays within its frequency-domain budget") {
  std::mt19937 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> taps(300);
    const double decay = 0.8 + 0.15 * (rng() % 100) / 100.0;
    for (std::size_t k = 0; k < taps.size(); ++k)
      taps[k] = std::pow(decay, static_cast<double>(k)) * (1.0 + 0.5 * testing::random_vector(rng, 1)[0]);
    const double threshold = 1e-6;
    double peak = 0.0;
    for (double t : taps) peak = std::max(peak, std::abs(t));
    const TwoSidedFir full(taps, 0);
    const std::size_t dropped = truncate_tail(taps, threshold);
    const TwoSidedFir cut(taps, 0);
    double worst = 0.0;
    for (double w : frequency_grid(1024, true)) worst = std::max(worst, std::abs(full.response(w) - cut.response(w)));
    CHECK(worst <= static_cast<double>(dropped) * threshold * peak);
    CHECK(std::abs(taps.back()) >= threshold * peak);
  }
  std::vector<double> small{1.0, 0.0, 0.0, 1e-9, 0.0};
  CHECK(truncate_tail(small, 1e-6, 2) == 3);
  CHECK(small == std::vector<double>{1.0, 0.0});
  std::vector<double> zeros(5, 0.0);
  CHECK(truncate_tail(zeros, 1e-3) == 0);
}

TEST_CASE("loop shaping configuration validation") {
  LoopShapeConfig cfg;
  cfg.horizon = 501;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.truncation_threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.slow_pole_radius = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  SimulatedPlant d2(RationalTf::delay(2));
  CHECK_THROWS_AS(run_loopshaping(d2, RationalTf({1.0}, {1.0, -0.5}), small_config(64, 32)), AssumptionViolation);
}
