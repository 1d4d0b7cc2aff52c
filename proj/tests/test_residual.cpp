#include <cmath>
#include <filesystem>

#include "ascsense/residual_compensation.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ascsense;

TEST_CASE("circular mean across the wrap point") {
  RVec d(4);
  d << 0.9, 0.95, 0.05, 0.1;
  CHECK(circular_distance(circular_mean(d, 1.0), 0.0, 1.0) < 1e-12);
  RVec e(2);
  e << 0.2, 0.4;
  CHECK(circular_mean(e, 1.0) == doctest::Approx(0.3));
}

TEST_CASE("reference acquisition resolves the clock error") {
  SystemConfig cfg;
  cfg.noise_power = 1e-4;
  ScenarioSpec spec;
  const auto geom = ArrayGeometry::single();
  const Scenario sc = random_scenario(cfg, geom, spec, 17);
  ClockErrorLaw law;
  law.mean = -23e-9;
  const auto tr = synthesize_bidirectional(cfg, geom, sc.statics, 100, 0.0, law, 3);
  const auto ref = acquire_reference(tr, cfg);
  CHECK(std::abs(ref.clock_error_estimate - law.mean) < 1e-9);
  const CVec hs = sc.statics.merged(cfg, geom);
  CHECK(std::abs(ref.h.normalized().dot(hs)) / hs.norm() > 0.999);
  CHECK(ref.h.norm() == doctest::Approx(1.0));
}

TEST_CASE("residual estimation recovers a common shift of the aligned CPI") {
  SystemConfig cfg;
  cfg.T = 60;
  ScenarioSpec spec;
  const auto geom = ArrayGeometry::single();
  const Scenario sc = random_scenario(cfg, geom, spec, 23);
  const double shift = 137e-9;
  OffsetSequence off = OffsetSequence::zeros(cfg.T);
  for (int t = 0; t < cfg.T; ++t) off.to(t) = shift;
  CsiMatrix aligned = synthesize_cpi(cfg, geom, sc.statics, sc.dynamics, off, 2);
  aligned.stage = Stage::aligned;
  ReferenceStaticResponse ref;
  ref.h = sc.statics.merged(cfg, geom).normalized();
  const auto grid = SearchGrid::for_system(cfg, 4096);
  const auto out = estimate_to_residual(aligned, ref, cfg, grid);
  CHECK(out.H.stage == Stage::compensated);
  CHECK(delay_to_range(circular_distance(out.residual, shift, cfg.alias_period())) < 0.02);
}

TEST_CASE("reference blob round trip and mismatch detection") {
  SystemConfig cfg;
  ReferenceStaticResponse ref;
  ref.h = testutil::random_vector(5, cfg.K).normalized();
  ref.T_s = 100;
  ref.timestamp_noise_std = 2.5e-9;
  ref.clock_error_estimate = 12e-9;
  const auto path = (std::filesystem::temp_directory_path() / "ascsense_ref_test.asrf").string();
  save_reference(path, ref, cfg);
  const auto back = load_reference(path, cfg);
  CHECK((back.h - ref.h).norm() == 0.0);
  CHECK(back.T_s == 100);
  CHECK(back.clock_error_estimate == ref.clock_error_estimate);
  SystemConfig other = cfg;
  other.K = 16;
  CHECK_THROWS_AS(load_reference(path, other), Error);
  std::filesystem::remove(path);
}

TEST_CASE("alternative reference rejects a dynamic CPI") {
  SystemConfig cfg;
  CsiMatrix x;
  x.stage = Stage::aligned;
  const CVec h = testutil::random_vector(1, cfg.K);
  x.data = h * CMat::Ones(1, 20);
  const auto ref = alternative_reference(x);
  CHECK(ref.unknown_initial_to);
  CHECK(std::abs(ref.h.dot(h.normalized())) == doctest::Approx(1.0));
  x.data = testutil::random_matrix(2, cfg.K, 20);
  CHECK_THROWS_AS(alternative_reference(x), Error);
}
