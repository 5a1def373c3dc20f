#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pdifmp/simulate.hpp"
#include "stats.hpp"

using namespace pdifmp;
using Catch::Approx;

namespace {

ParamVector setting1() { return {1.0, 2.0, 0.1, {}}; }

}  // namespace

TEST_CASE("Segment grid arithmetic") {
  auto g = make_segment_grid(0.0, 0.95, 0.1);
  CHECK(g.n_full_steps == 9);
  CHECK(g.last_step == Approx(0.05));
  g = make_segment_grid(0.0, 1.0, 0.1);
  CHECK(g.n_full_steps == 10);
  CHECK(g.last_step == Approx(0.0).margin(1e-15));
  g = make_segment_grid(3.0, 3.004, 0.01);
  CHECK(g.n_full_steps == 0);
  CHECK(g.last_step == Approx(0.004));
  CHECK_THROWS_AS(make_segment_grid(1.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(make_segment_grid(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("Segment grid invariants hold on arbitrary segments") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double a = 100.0 * rng.uniform();
    const double b = a + 1e-3 + 20.0 * rng.uniform();
    const double h = 0.01;
    const auto g = make_segment_grid(a, b, h);
    CHECK(g.last_step >= 0.0);
    CHECK(g.last_step < h);
    CHECK(a + static_cast<double>(g.n_full_steps) * h <= b);
  }
}

TEST_CASE("Rate functions") {
  CHECK(eval_rate({RateKind::Sigmoid, 0.1}, 0.0) == Approx(0.05));
  CHECK(eval_rate({RateKind::ReducedCenter, 0.1}, 2.0) == Approx(0.05));
  CHECK(eval_rate({RateKind::ReducedCenter, 0.1}, -2.0) == Approx(0.05));
  CHECK(eval_rate({RateKind::ReducedCenter, 0.1}, 2.01) == Approx(0.1));
  CHECK(eval_rate({RateKind::Cos, 0.1}, std::numbers::pi) == Approx(0.0).margin(1e-16));
  CHECK(eval_rate({RateKind::Constant, 0.3}, 17.0) == 0.3);
  CHECK(RateFunction{RateKind::Cos, 0.1}.bound() == Approx(0.2));
  CHECK(RateFunction{RateKind::Sigmoid, 0.1}.bound() == 0.1);
}

TEST_CASE("Rates stay inside [0, bound]") {
  Rng rng(9);
  for (auto kind : {RateKind::Constant, RateKind::Sigmoid, RateKind::ReducedCenter, RateKind::Cos}) {
    for (int i = 0; i < 5000; ++i) {
      const RateFunction rf{kind, 0.01 + rng.uniform()};
      const double x = 60.0 * (rng.uniform() - 0.5);
      const double r = eval_rate(rf, x);
      CHECK(r >= 0.0);
      CHECK(r <= rf.bound());
    }
  }
}

TEST_CASE("Segment simulation returns the grid points after the start") {
  auto model = ModelSpec::defaults(ModelId::TP3_WPWD, 10.0);
  Rng rng(1);
  auto pts = simulate_segment(model, {1.0, 2.0, 0.1, {}}, 0.0, 0.95, 0.1, {0.0, 0.0}, 2.0, rng);
  REQUIRE(pts.size() == 10);
  CHECK(pts.back().time == 0.95);
  CHECK(pts.front().time == Approx(0.1));
  pts = simulate_segment(model, {1.0, 2.0, 0.1, {}}, 0.0, 1.0, 0.1, {0.0, 0.0}, 2.0, rng);
  REQUIRE(pts.size() == 11);
  // Zero-length final step leaves the state unchanged.
  CHECK(pts[10].state[0] == pts[9].state[0]);
  // Deterministic flow: sigma = 0.
  pts = simulate_segment(model, {0.0, 2.0, 0.1, {}}, 0.0, 1.0, 0.01, {0.5, 0.0}, 2.0, rng);
  CHECK(pts.back().state[0] == Approx(2.5).epsilon(1e-12));
}

TEST_CASE("Constant-rate paths are well formed") {
  for (auto id : {ModelId::TP1_OU, ModelId::TP2_WDSHO, ModelId::TP3_WPWD, ModelId::TP4_SwitchedSHO}) {
    const auto model = ModelSpec::defaults(id, 200.0);
    ParamVector p = setting1();
    if (id == ModelId::TP2_WDSHO) p.b = 10.0;
    if (id == ModelId::TP4_SwitchedSHO) p.b = 0.1;
    Rng rng(42);
    const HybridPath path = simulate(model, p, rng);
    INFO(model_name(id));
    CHECK(path.times.front() == 0.0);
    CHECK(path.times.back() == 200.0);
    CHECK(path.x.size() == path.times.size() * model.dim());
    CHECK(path.z_values.size() == path.n_jumps + 1);
    CHECK(path.jump_times.size() == path.n_jumps);
    for (std::size_t i = 1; i < path.times.size(); ++i) REQUIRE(path.times[i] > path.times[i - 1]);
    for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
      CHECK(path.jump_times[k] > 0.0);
      CHECK(path.jump_times[k] < 200.0);
      if (k > 0) CHECK(path.jump_times[k] > path.jump_times[k - 1]);
    }
    // Every jump time is a path point.
    for (double j : path.jump_times) {
      CHECK(std::binary_search(path.times.begin(), path.times.end(), j));
    }
    // About T/h + jumps points.
    CHECK(path.size() >= 20000);
    CHECK(path.size() <= 20001 + path.n_jumps);
  }
}

TEST_CASE("Regimes follow the transition kernels") {
  SECTION("TP2 alternates") {
    const auto model = ModelSpec::defaults(ModelId::TP2_WDSHO, 1000.0);
    Rng rng(7);
    const auto path = simulate(model, {1.0, 10.0, 0.1, {}}, rng);
    REQUIRE(path.n_jumps > 10);
    for (std::size_t k = 0; k < path.z_values.size(); ++k) {
      CHECK(path.z_values[k] == (k % 2 == 0 ? 10.0 : 2.0));
    }
    // Rounded jump times are multiples of 1e-3.
    for (double j : path.jump_times) CHECK(std::abs(j * 1000.0 - std::round(j * 1000.0)) < 1e-6);
  }
  SECTION("TP1 picks the regime from the sign at the jump") {
    const auto model = ModelSpec::defaults(ModelId::TP1_OU, 500.0);
    Rng rng(8);
    const auto path = simulate(model, setting1(), rng);
    for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
      const auto it = std::lower_bound(path.times.begin(), path.times.end(), path.jump_times[k]);
      const auto i = static_cast<std::size_t>(it - path.times.begin());
      CHECK(path.z_values[k + 1] == transition_tp1_tp3(path.state(i), 2.0));
    }
  }
}

TEST_CASE("Same seed gives the same path") {
  const auto model = ModelSpec::defaults(ModelId::TP4_SwitchedSHO, 300.0);
  Rng a(99), b(99);
  const auto p1 = simulate(model, {1.0, 0.1, 0.1, {}}, a);
  const auto p2 = simulate(model, {1.0, 0.1, 0.1, {}}, b);
  CHECK(p1.times == p2.times);
  CHECK(p1.x == p2.x);
  CHECK(p1.jump_times == p2.jump_times);
}

TEST_CASE("First waiting time beyond the horizon gives no jumps") {
  auto model = ModelSpec::defaults(ModelId::TP1_OU, 1.0);
  Rng rng(1);
  const auto path = simulate_constant_rate(model, {1.0, 2.0, 1e-9, {}}, rng);
  CHECK(path.n_jumps == 0);
  CHECK(path.z_values.size() == 1);
  CHECK(path.size() == 101);
}

TEST_CASE("Constant-rate waiting times are exponential") {
  auto model = ModelSpec::defaults(ModelId::TP3_WPWD, 20000.0);
  model.step = 0.5;
  Rng rng(2024);
  const auto path = simulate_constant_rate(model, {1.0, 2.0, 0.5, {}}, rng);
  std::vector<double> waits;
  double prev = 0.0;
  for (double j : path.jump_times) {
    waits.push_back(j - prev);
    prev = j;
  }
  REQUIRE(waits.size() > 9000);
  const auto ks = testing::ks_one_sample(waits, [](double w) { return 1.0 - std::exp(-0.5 * w); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("Jump counts have Poisson mean and variance") {
  auto model = ModelSpec::defaults(ModelId::TP3_WPWD, 500.0);
  model.step = 0.5;
  std::vector<double> counts;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng rng(17, {i});
    counts.push_back(static_cast<double>(simulate_constant_rate(model, {1.0, 2.0, 0.1, {}}, rng).n_jumps));
  }
  const double m = testing::mean(counts);
  CHECK(std::abs(m - 50.0) < 3.0 * std::sqrt(50.0 / 1000.0));
  // Variance of the sample variance of Poisson(50) ~ (2 mu^2 + mu) / n.
  CHECK(std::abs(testing::variance(counts) - 50.0) < 3.0 * std::sqrt((2.0 * 2500.0 + 50.0) / 999.0));
}

TEST_CASE("Thinning with zero rate never jumps; with full rate matches constant rate") {
  auto model = ModelSpec::defaults(ModelId::TP1_OU, 200.0);
  model.step = 0.05;
  Rng rng(3);
  const auto none = simulate_thinning(model, setting1(), [](double) { return 0.0; }, 0.5, rng);
  CHECK(none.n_jumps == 0);
  std::vector<double> a, b;
  for (std::uint64_t i = 0; i < 400; ++i) {
    Rng r1(100, {i}), r2(200, {i});
    a.push_back(static_cast<double>(
        simulate_thinning(model, {1.0, 2.0, 0.2, {}}, [](double) { return 0.2; }, 0.2, r1).n_jumps));
    b.push_back(static_cast<double>(simulate_constant_rate(model, {1.0, 2.0, 0.2, {}}, r2).n_jumps));
  }
  CHECK(testing::ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("Thinning rejects a rate above its bound") {
  auto model = ModelSpec::defaults(ModelId::TP1_OU, 100.0);
  Rng rng(4);
  CHECK_THROWS_AS(simulate_thinning(model, setting1(), [](double) { return 0.3; }, 0.2, rng), ThinningViolation);
}

TEST_CASE("Thinning acceptance probabilities come from rates inside the bound") {
  auto model = ModelSpec::defaults(ModelId::TP1_OU, 500.0);
  model.rate_kind = RateKind::Cos;
  double worst = 0.0;
  const RateFunction rf{RateKind::Cos, 0.1};
  Rng rng(12);
  const auto path = simulate_thinning(
      model, setting1(),
      [&](double x) {
        const double r = eval_rate(rf, x);
        worst = std::max(worst, r / rf.bound());
        return r;
      },
      rf.bound(), rng);
  CHECK(worst <= 1.0);
  CHECK(path.n_jumps > 0);
}

TEST_CASE("Sigmoid rate makes TP1 linger around the negative level") {
  auto model = ModelSpec::defaults(ModelId::TP1_OU, 5000.0);
  model.rate_kind = RateKind::Sigmoid;
  Rng rng(21);
  const auto path = simulate(model, setting1(), rng);
  std::size_t neg = 0;
  for (std::size_t i = 0; i < path.size(); ++i) neg += path.state(i) < 0.0 ? 1 : 0;
  CHECK(static_cast<double>(neg) / static_cast<double>(path.size()) > 0.55);
}

TEST_CASE("TP1 setting 1 alternates around +-2") {
  const auto model = ModelSpec::defaults(ModelId::TP1_OU, 5000.0);
  Rng rng(5);
  const auto path = simulate(model, setting1(), rng);
  double pos_sum = 0, neg_sum = 0;
  std::size_t pos_n = 0, neg_n = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path.regime_at(i) > 0) {
      pos_sum += path.state(i);
      ++pos_n;
    } else {
      neg_sum += path.state(i);
      ++neg_n;
    }
  }
  // Segment means lag behind the level after a switch; they still sit on the right side.
  CHECK(pos_sum / static_cast<double>(pos_n) > 1.0);
  CHECK(neg_sum / static_cast<double>(neg_n) < -1.0);
}

TEST_CASE("Jump-time rounding") {
  CHECK(round_jump_time(3.14159, 3.0, 1e-3) == Approx(3.142));
  CHECK(round_jump_time(3.1421, 3.142, 1e-3) == Approx(3.143));
  CHECK(round_jump_time(3.14201, 3.142, 1e-3) > 3.142);
}

TEST_CASE("Invalid parameters are rejected") {
  const auto tp2 = ModelSpec::defaults(ModelId::TP2_WDSHO, 100.0);
  Rng rng(1);
  CHECK_THROWS_AS(simulate(tp2, {1.0, 0.5, 0.1, {}}, rng), std::invalid_argument);
  const auto tp1 = ModelSpec::defaults(ModelId::TP1_OU, 100.0);
  CHECK_THROWS_AS(simulate(tp1, {std::nan(""), 2.0, 0.1, {}}, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate(tp1, {1.0, 2.0, 0.0, {}}, rng), std::invalid_argument);
}

TEST_CASE("Exact flows agree with Euler-Maruyama (small instance)") {
  // Full-size version lives in the acceptance suite.
  const std::size_t n = 2000;
  for (auto id : {ModelId::TP1_OU, ModelId::TP2_WDSHO, ModelId::TP3_WPWD, ModelId::TP4_SwitchedSHO}) {
    const auto model = ModelSpec::defaults(id, 1.0);
    ParamVector p = setting1();
    double z = 2.0;
    if (id == ModelId::TP2_WDSHO) { p.b = 10.0; z = 2.0; }
    if (id == ModelId::TP4_SwitchedSHO) { p.b = 0.1; z = 0.1; }
    const Vec2 x0{model.x0[0], model.dim() == 2 ? model.x0[1] : 0.0};
    std::vector<double> exact, em;
    for (std::uint64_t i = 0; i < n; ++i) {
      Rng r1(1, {i}), r2(2, {i});
      exact.push_back(simulate_segment(model, p, 0.0, 1.0, 0.01, x0, z, r1).back().state[0]);
      em.push_back(testing::euler_maruyama(model, p, z, x0, 1.0, 1e-3, r2)[0]);
    }
    INFO(model_name(id));
    CHECK(testing::ks_two_sample(exact, em).p_value > 0.001);
  }
}
