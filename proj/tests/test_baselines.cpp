#include <cmath>

#include "ascsense/baselines.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ascsense;

namespace {

struct StaticOnly {
  SystemConfig cfg;
  Scenario sc;
  CsiMatrix raw;
};

StaticOnly static_only(std::uint64_t seed) {
  StaticOnly s;
  s.cfg.T = 30;
  ScenarioSpec spec;
  spec.n_dynamic = 0;
  spec.dyn_proportion = 0.0;
  s.sc = random_scenario(s.cfg, ArrayGeometry::single(), spec, seed);
  s.raw = synthesize_cpi(s.cfg, ArrayGeometry::single(), s.sc.statics, {}, s.sc.offsets, 1);
  return s;
}

double worst_relative_error(const StaticOnly& s, const RVec& rel) {
  const double P = s.cfg.alias_period();
  double worst = 0.0;
  for (int t = 0; t < s.cfg.T; ++t) {
    const double e = wrap_delay(s.sc.offsets.to(t) - rel(t), P);
    worst = std::max(worst, circular_distance(e, s.sc.offsets.to(0), P));
  }
  return delay_to_range(worst);
}

}  // namespace

TEST_CASE("baseline names") {
  CHECK(std::string(to_string(BaselineKind::similarity)) == "simil");
  CHECK(std::string(to_string(BaselineKind::envelope)) == "evlp");
  CHECK(std::string(to_string(BaselineKind::ifft_peak)) == "ifft");
}

TEST_CASE("baselines align a static-only stream") {
  const auto s = static_only(31);
  for (BaselineKind k : {BaselineKind::similarity, BaselineKind::envelope, BaselineKind::ifft_peak}) {
    CAPTURE(to_string(k));
    const auto res = align_baseline(k, s.raw, s.cfg);
    CHECK(res.aligned.stage == Stage::aligned);
    CHECK(res.relative_to.size() == s.cfg.T);
    CHECK(worst_relative_error(s, res.relative_to) < 0.05);
  }
}

TEST_CASE("phase-aware baselines also remove the PO") {
  const auto s = static_only(37);
  for (BaselineKind k : {BaselineKind::similarity, BaselineKind::ifft_peak}) {
    CAPTURE(to_string(k));
    const CMat A = align_baseline(k, s.raw, s.cfg).aligned.data;
    for (int t = 1; t < s.cfg.T; ++t) {
      const double c = std::abs(A.col(t).dot(A.col(0))) / (A.col(t).norm() * A.col(0).norm());
      CHECK(c > 0.999);
      CHECK(std::abs(std::arg(A.col(0).dot(A.col(t)))) < 0.05);
    }
  }
}

TEST_CASE("baselines reject aligned input") {
  auto s = static_only(41);
  s.raw.stage = Stage::aligned;
  CHECK_THROWS_AS(align_similarity(s.raw, s.cfg), Error);
}
