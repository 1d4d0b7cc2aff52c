#include <algorithm>
#include <cmath>
#include <tuple>

#include "ascsense/harness.hpp"
#include "ascsense/metrics.hpp"
#include "doctest.h"

using namespace ascsense;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.system.T = 60;
  c.trials = 2;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("nope"), Error);
}

TEST_CASE("sweep points enumerate snr, proportion then separation") {
  ExperimentConfig c;
  c.snr_db = {10, 20};
  c.dyn_prop = {0.3, 0.8};
  c.scenario.n_dynamic = 2;
  c.tau_sep = {0.5, 1.0, 1.5};
  const auto pts = sweep_points(c);
  REQUIRE(pts.size() == 12);
  CHECK(pts[0].snr_db == 10);
  CHECK(pts[0].dyn_prop == 0.3);
  CHECK(*pts[1].tau_sep == 1.0);
  CHECK(pts[3].dyn_prop == 0.8);
  CHECK(pts[6].snr_db == 20);
  for (int i = 0; i < 12; ++i) CHECK(pts[i].index == i);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.tau_sep = {1.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c.scenario.n_dynamic = 2;
  CHECK_NOTHROW(c.validate());
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("trial synthesis is keyed by coordinates") {
  const auto c = small_config();
  const auto pts = sweep_points(c);
  const auto a = synthesize_trial(c, pts[0], 1);
  const auto b = synthesize_trial(c, pts[0], 1);
  const auto d = synthesize_trial(c, pts[0], 2);
  CHECK((a.raw.data - b.raw.data).norm() == 0.0);
  CHECK((a.raw.data - d.raw.data).norm() > 0.0);
  CHECK_FALSE(a.reference.empty());
  const CVec hs = a.scenario.statics.merged(a.system, a.geometry);
  CHECK(std::abs(a.reference.h.dot(hs)) / hs.norm() > 0.99);
}

TEST_CASE("synchronized CPI shares the noise realization") {
  auto c = small_config();
  const auto pts = sweep_points(c);
  const auto in = synthesize_trial(c, pts[0], 0);
  const CsiMatrix s = synchronized_cpi(c, pts[0], 0, in);
  const Scenario& sc = in.scenario;
  SystemConfig quiet = in.system;
  quiet.noise_power = 0.0;
  const CsiMatrix raw_clean = synthesize_cpi(quiet, in.geometry, sc.statics, sc.dynamics,
                                             sc.offsets, 0);
  const CsiMatrix sync_clean = synthesize_cpi(quiet, in.geometry, sc.statics, sc.dynamics,
                                              OffsetSequence::zeros(quiet.T), 0);
  const CMat noise_raw = in.raw.data - raw_clean.data;
  const CMat noise_sync = s.data - sync_clean.data;
  CHECK((noise_raw - noise_sync).norm() < 1e-12 * noise_raw.norm());
}

TEST_CASE("small sweep produces one row per trial and method") {
  const auto c = small_config();
  const auto t = run_sweep(c);
  CHECK(t.trials.size() == static_cast<std::size_t>(c.trials) * c.methods.size());
  for (std::size_t i = 1; i < t.trials.size(); ++i) {
    const auto& p = t.trials[i - 1];
    const auto& q = t.trials[i];
    CHECK(std::tie(p.point, p.trial, p.method) < std::tie(q.point, q.trial, q.method));
  }
  for (const auto& r : t.trials) {
    CHECK(r.flags.find("error") == std::string::npos);
    CHECK(r.rel_to_error >= 0.0);
  }
  const double p = resolution_probability(t, 0, Method::synchronized);
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
}

TEST_CASE("pipeline on a noiseless synchronized CPI finds the targets") {
  auto c = small_config();
  c.snr_db = {300.0};
  const auto pts = sweep_points(c);
  const auto in = synthesize_trial(c, pts[0], 0, false);
  const CsiMatrix s = synchronized_cpi(c, pts[0], 0, in);
  ReferenceStaticResponse ref;
  ref.h = in.scenario.statics.merged(in.system, in.geometry).normalized();
  auto opts = pipeline_options(c);
  opts.n_targets = static_cast<int>(in.scenario.dynamics.size());
  const auto out = run_pipeline(Method::synchronized, s, ref, in.system, in.geometry, opts);
  REQUIRE(out.targets.delays.size() == in.scenario.dynamics.size());
  std::vector<double> truth, est;
  for (const auto& d : in.scenario.dynamics) truth.push_back(d.delay);
  est = out.targets.delays;
  std::sort(truth.begin(), truth.end());
  std::sort(est.begin(), est.end());
  for (std::size_t i = 0; i < truth.size(); ++i)
    CHECK(delay_to_range(std::abs(truth[i] - est[i])) < 0.02);
}
