#include <algorithm>
#include <cmath>
#include <vector>

#include "ascsense/to_alignment.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ascsense;

namespace {

Scenario noiseless_scenario(const SystemConfig& cfg, std::uint64_t seed) {
  ScenarioSpec spec;
  return random_scenario(cfg, ArrayGeometry::single(), spec, seed);
}

}  // namespace

TEST_CASE("Hankel subarray sizes") {
  CHECK(hankel_subarray_size(32, 2) == 16);
  CHECK(hankel_subarray_size(32, 3) == 22);
  CHECK(hankel_subarray_size(32, 32) == 31);
  CHECK(hankel_subarray_size(4, 2) == 2);
}

TEST_CASE("Hankel smoothing stacks overlapping windows per antenna block") {
  const int K = 5, M = 2, s = 3;
  CMat X(K * M, 2);
  for (int i = 0; i < X.rows(); ++i)
    for (int c = 0; c < 2; ++c) X(i, c) = cd(i, 10 * c);
  const CMat Y = hankel_smooth(X, K, M, s);
  CHECK(Y.rows() == M * s);
  CHECK(Y.cols() == (K - s + 1) * 2);
  // column (c = 1, k = 2): block 0 rows 2..4, block 1 rows 7..9 of snapshot 1
  const CVec col = Y.col(1 * 3 + 2);
  for (int i = 0; i < s; ++i) {
    CHECK(col(i) == cd(2 + i, 10));
    CHECK(col(s + i) == cd(K + 2 + i, 10));
  }
}

TEST_CASE("MDL order estimates") {
  RVec flat = RVec::Constant(6, 2.0);
  CHECK(mdl_dimension(flat, 50) == 1);
  RVec two(6);
  two << 50, 20, 1, 1, 1, 1;
  CHECK(mdl_dimension(two, 50) == 2);
  RVec five(6);
  five << 1e4, 1e3, 1e2, 50, 20, 1e-3;
  CHECK(mdl_dimension(five, 100) == 5);
  CHECK_THROWS_AS(mdl_dimension(RVec::Zero(4), 10), Error);
}

TEST_CASE("subspace projector splits signal and noise") {
  const CMat S = testutil::random_matrix(3, 8, 2) * testutil::random_matrix(4, 2, 40);
  const CMat W = S + 1e-4 * testutil::random_matrix(5, 8, 40);
  const auto est = subspace_projector(W);
  CHECK(est.dimension == 2);
  CHECK(est.noise_basis.cols() == 6);
  const CMat P = est.noise_projector();
  CHECK((P * S).norm() < 1e-3 * S.norm());
}

TEST_CASE("covariance factor inverts the regularized covariance") {
  const CMat W = testutil::random_matrix(6, 5, 7);
  const auto cov = covariance_factor(W);
  CHECK(cov.noise_power > 0.0);
  const CMat C = W * W.adjoint() / 7.0 + cov.noise_power * CMat::Identity(5, 5);
  CHECK((cov.kernel * C - CMat::Identity(5, 5)).norm() < 1e-9);
  CHECK((cov.factor * cov.factor.adjoint() - cov.kernel).norm() < 1e-9 * cov.kernel.norm());
}

TEST_CASE("compensation removes a pure delay") {
  SystemConfig cfg;
  const CVec h = testutil::random_vector(8, cfg.K);
  const CVec shifted = h.cwiseProduct(testutil::plain_steering(cfg.K, cfg.delta_f, 55e-9));
  CHECK((compensate_to(shifted, 55e-9, cfg) - h).norm() < 1e-10);
}

TEST_CASE("noiseless single-path stream aligns to the first snapshot") {
  for (AlignMethod method : {AlignMethod::subspace, AlignMethod::covariance}) {
    SystemConfig cfg;
    cfg.T = 60;
    StaticPathSet st;
    st.delays = RVec::Constant(1, 40e-9);
    st.gains = CVec::Constant(1, cd(0.6, -0.8));
    OffsetSequence off = OffsetSequence::zeros(cfg.T);
    for (int t = 0; t < cfg.T; ++t) off.to(t) = wrap_delay(37e-9 * t * t, cfg.alias_period());
    const CsiMatrix raw = synthesize_cpi(cfg, ArrayGeometry::single(), st, {}, off, 1);
    AlignmentOptions opts;
    opts.method = method;
    const auto res = align_stream(raw, cfg, opts);
    CHECK(res.aligned.stage == Stage::aligned);
    CHECK(res.relative_to(0) == 0.0);
    const double P = cfg.alias_period();
    double worst = 0.0;
    for (int t = 0; t < cfg.T; ++t)
      worst = std::max(worst, circular_distance(res.relative_to(t), off.to(t) - off.to(0), P));
    CHECK(worst < 0.05e-9);
  }
}

TEST_CASE("zero-offset noiseless stream passes through unchanged") {
  SystemConfig cfg;
  cfg.T = 50;
  StaticPathSet st;
  st.delays = RVec::Constant(1, 30e-9);
  st.gains = CVec::Constant(1, cd(1.0, 0.0));
  DynamicPath d;
  d.delay = 70e-9;
  d.cgs = 0.5 * testutil::random_vector(2, cfg.T);
  const CsiMatrix raw = synthesize_cpi(cfg, ArrayGeometry::single(), st, {d},
                                       OffsetSequence::zeros(cfg.T), 1);
  const auto res = align_stream(raw, cfg, {});
  // parabolic refinement of a slightly asymmetric minimum leaves a sub-femtosecond residue
  const double step = SearchGrid::for_system(cfg, 4096).step;
  for (int t = 0; t < cfg.T; ++t)
    CHECK(circular_distance(res.relative_to(t), 0.0, cfg.alias_period()) < 1e-3 * step);
  CHECK((res.aligned.data - raw.data).norm() < 1e-4 * raw.data.norm());
}

TEST_CASE("shifted snapshot against an exact window") {
  SystemConfig cfg;
  cfg.T = 60;
  const Scenario sc = noiseless_scenario(cfg, 4);
  const CsiMatrix clean = synthesize_cpi(cfg, ArrayGeometry::single(), sc.statics, sc.dynamics,
                                         OffsetSequence::zeros(cfg.T), 1);
  const CMat W = clean.data.leftCols(48);
  const auto grid = SearchGrid::for_system(cfg, 4096);
  const CVec h = clean.data.col(50).cwiseProduct(testutil::plain_steering(cfg.K, cfg.delta_f, 2e-9));
  const auto sub = estimate_relative_to_subspace(h, subspace_projector(W), grid);
  const auto cov = estimate_relative_to_covariance(h, covariance_factor(W), grid);
  CHECK(std::abs(sub.delay - 2e-9) < 0.01e-9);
  CHECK(std::abs(cov.delay - 2e-9) < 0.01e-9);
}

TEST_CASE("multipath noiseless stream stays within a few centimeters") {
  SystemConfig cfg;
  cfg.T = 80;
  const Scenario sc = noiseless_scenario(cfg, 4);
  const CsiMatrix raw =
      synthesize_cpi(cfg, ArrayGeometry::single(), sc.statics, sc.dynamics, sc.offsets, 1);
  const auto res = align_stream(raw, cfg, {});
  const double P = cfg.alias_period();
  std::vector<double> err;
  for (int t = 0; t < cfg.T; ++t) {
    const double e = wrap_delay(sc.offsets.to(t) - res.relative_to(t), P);
    err.push_back(delay_to_range(circular_distance(e, sc.offsets.to(0), P)));
  }
  std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
  CHECK(err[err.size() / 2] < 0.05);
}

TEST_CASE("alignment rejects bad input") {
  SystemConfig cfg;
  AlignmentOptions opts;
  opts.window = 1;
  CHECK_THROWS_AS(AlignmentState(cfg, opts), Error);
  AlignmentState st(cfg, {});
  CHECK_THROWS_AS(st.align_snapshot(CVec::Zero(cfg.K + 1)), Error);
  CsiMatrix done;
  done.stage = Stage::aligned;
  done.data = CMat::Zero(cfg.K, 3);
  CHECK_THROWS_AS(align_stream(done, cfg, {}), Error);
}

TEST_CASE("zero snapshots are flagged degenerate") {
  SystemConfig cfg;
  AlignmentState st(cfg, {});
  st.align_snapshot(testutil::random_vector(3, cfg.K));
  st.align_snapshot(CVec::Zero(cfg.K));
  CHECK(st.last_degenerate());
  CHECK(st.degenerate_count() == 1);
}
