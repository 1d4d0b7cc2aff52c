#include <cmath>

#include "ascsense/rng.hpp"
#include "ascsense/signal_model.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ascsense;

TEST_CASE("wrap and circular distance") {
  CHECK(wrap_delay(-1.0, 4.0) == doctest::Approx(3.0));
  CHECK(wrap_delay(9.0, 4.0) == doctest::Approx(1.0));
  CHECK(wrap_phase(kPi) == doctest::Approx(-kPi));
  CHECK(wrap_phase(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(circular_distance(0.1, 3.9, 4.0) == doctest::Approx(0.2));
  CHECK(circular_distance(1.0, 3.0, 4.0) == doctest::Approx(2.0));
}

TEST_CASE("steering vector matches the exponential definition") {
  SystemConfig cfg;
  for (double tau : {0.0, 13e-9, 250e-9, 401e-9, -37e-9}) {
    const CVec a = steering_vector(cfg, tau);
    const CVec ref = testutil::plain_steering(cfg.K, cfg.delta_f, tau);
    CHECK((a - ref).norm() < 1e-9);
  }
}

TEST_CASE("MIMO steering is the Kronecker product with the ULA phases") {
  SystemConfig cfg;
  cfg.M = 3;
  const double lambda = cfg.wavelength();
  const auto geom = ArrayGeometry::uniform_linear(3, lambda / 2, lambda);
  const double theta = 0.3, tau = 40e-9;
  const CVec a = steering_vector_mimo(cfg, geom, theta, tau);
  const CVec base = testutil::plain_steering(cfg.K, cfg.delta_f, tau);
  for (int m = 0; m < 3; ++m) {
    const cd s = std::exp(cd(0.0, kPi * m * std::sin(theta)));
    CHECK((a.segment(m * cfg.K, cfg.K) - s * base).norm() < 1e-9);
  }
  CHECK(geom.phases(0.0).norm() == doctest::Approx(0.0));
}

TEST_CASE("noiseless CPI follows the signal model column by column") {
  SystemConfig cfg;
  cfg.K = 8;
  cfg.T = 5;
  const auto geom = ArrayGeometry::single();
  StaticPathSet st;
  st.delays = RVec::LinSpaced(2, 20e-9, 60e-9);
  st.gains = testutil::random_vector(11, 2);
  DynamicPath d;
  d.delay = 45e-9;
  d.cgs = testutil::random_vector(12, cfg.T);
  OffsetSequence off;
  off.to = RVec::LinSpaced(cfg.T, 0.0, 300e-9);
  off.po = RVec::LinSpaced(cfg.T, -1.0, 2.0);
  const CsiMatrix X = synthesize_cpi(cfg, geom, st, {d}, off, 5);
  CHECK(X.stage == Stage::raw);
  for (int t = 0; t < cfg.T; ++t) {
    CVec h = st.gains(0) * testutil::plain_steering(cfg.K, cfg.delta_f, st.delays(0)) +
             st.gains(1) * testutil::plain_steering(cfg.K, cfg.delta_f, st.delays(1)) +
             d.cgs(t) * testutil::plain_steering(cfg.K, cfg.delta_f, d.delay);
    h = h.cwiseProduct(testutil::plain_steering(cfg.K, cfg.delta_f, off.to(t))) *
        std::exp(cd(0.0, off.po(t)));
    CHECK((X.data.col(t) - h).norm() < 1e-9 * h.norm());
  }
}

TEST_CASE("random scenario honours power proportion and SNR") {
  SystemConfig cfg;
  ScenarioSpec spec;
  spec.dyn_proportion = 0.4;
  spec.snr_db = 20.0;
  const auto geom = ArrayGeometry::single();
  const Scenario sc = random_scenario(cfg, geom, spec, 77);
  CHECK(sc.statics.size() == 7);
  CHECK(sc.dynamics.size() == 3);
  CHECK(sc.noise_power == doctest::Approx(0.01));
  CHECK(sc.statics.merged(cfg, geom).squaredNorm() / cfg.K == doctest::Approx(0.6));
  for (const auto& d : sc.dynamics) {
    const double r = delay_to_range(d.delay);
    CHECK(r >= 8.0);
    CHECK(r <= 20.0);
  }
  for (int t = 0; t < cfg.T; ++t) {
    CHECK(sc.offsets.to(t) >= 0.0);
    CHECK(sc.offsets.to(t) < cfg.alias_period());
  }
}

TEST_CASE("two-target layout keeps the requested separation") {
  SystemConfig cfg;
  ScenarioSpec spec;
  spec.n_dynamic = 2;
  spec.target_separation = 0.9;
  const Scenario sc = random_scenario(cfg, ArrayGeometry::single(), spec, 3);
  const double sep = delay_to_range(sc.dynamics[1].delay - sc.dynamics[0].delay);
  CHECK(sep == doctest::Approx(0.9));
}

TEST_CASE("infeasible scenarios are rejected") {
  SystemConfig cfg;
  ScenarioSpec spec;
  spec.dyn_proportion = 1.0;
  CHECK_THROWS_AS(random_scenario(cfg, ArrayGeometry::single(), spec, 1), Error);
  spec.dyn_proportion = 0.3;
  spec.n_static = 0;
  CHECK_THROWS_AS(random_scenario(cfg, ArrayGeometry::single(), spec, 1), Error);
}

TEST_CASE("stage tags only advance") {
  CsiMatrix x;
  x.advance(Stage::aligned);
  x.advance(Stage::compensated);
  CHECK_THROWS_AS(x.advance(Stage::aligned), Error);
}

TEST_CASE("counter RNG is reproducible and roughly standard") {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 5; ++i) CHECK(a() == b());
  CHECK(a() != c());
  CounterRng r(CounterRng::derive_key(1, 2, 3, Stream::noise));
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.03);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.05));
  CHECK(CounterRng::derive_key(1, 2, 3, Stream::noise) != CounterRng::derive_key(1, 2, 4, Stream::noise));
}

TEST_CASE("bidirectional trace timestamps follow the exchange model") {
  SystemConfig cfg;
  StaticPathSet st;
  st.delays = RVec::Constant(1, 30e-9);
  st.gains = CVec::Constant(1, cd(1.0, 0.0));
  ClockErrorLaw law;
  law.mean = 20e-9;
  const auto tr = synthesize_bidirectional(cfg, ArrayGeometry::single(), st, 40, 0.0, law, 9);
  CHECK(tr.size() == 40);
  for (int t = 0; t < tr.size(); ++t) {
    CHECK(tr.ue_rx(t) - tr.bs_tx(t) == doctest::Approx(tr.to_ue(t) - law.mean));
    CHECK(tr.bs_rx(t) - tr.ue_tx(t) == doctest::Approx(tr.to_bs(t) + law.mean));
  }
}
