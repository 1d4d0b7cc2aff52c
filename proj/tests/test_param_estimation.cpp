#include <algorithm>
#include <cmath>

#include "ascsense/metrics.hpp"
#include "ascsense/param_estimation.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ascsense;

namespace {

struct Synced {
  SystemConfig cfg;
  ArrayGeometry geom;
  Scenario sc;
  CsiMatrix H;
  ReferenceStaticResponse ref;
};

Synced synced(int M, double noise, std::uint64_t seed, std::vector<double> ranges,
              std::vector<double> aoas_deg = {}) {
  Synced s;
  s.cfg.M = M;
  s.cfg.noise_power = noise;
  s.geom = M == 1 ? ArrayGeometry::single()
                  : ArrayGeometry::uniform_linear(M, s.cfg.wavelength() / 2, s.cfg.wavelength());
  ScenarioSpec spec;
  spec.n_dynamic = static_cast<int>(ranges.size());
  spec.fixed_dynamic_ranges = ranges;
  for (double a : aoas_deg) spec.fixed_dynamic_aoas.push_back(a * kPi / 180);
  s.sc = random_scenario(s.cfg, s.geom, spec, seed);
  s.H = synthesize_cpi(s.cfg, s.geom, s.sc.statics, s.sc.dynamics,
                       OffsetSequence::zeros(s.cfg.T), seed + 1);
  s.H.stage = Stage::compensated;
  s.ref.h = s.sc.statics.merged(s.cfg, s.geom).normalized();
  return s;
}

}  // namespace

TEST_CASE("angle grid includes both endpoints") {
  const RVec a = angle_grid(-60, 60, 30);
  CHECK(a.size() == 5);
  CHECK(a(0) == doctest::Approx(-kPi / 3));
  CHECK(a(4) == doctest::Approx(kPi / 3));
}

TEST_CASE("modified MUSIC equals the ratio of quadratic forms") {
  auto s = synced(1, 1e-3, 5, {10.0, 15.0});
  const auto est = subspace_projector(s.H.data);
  const auto grid = SearchGrid::for_system(s.cfg, 256);
  const Spectrum sp = modified_music_spectrum(est, s.ref, s.cfg, s.geom, grid);
  const CMat Pn = est.noise_projector();
  const CMat Ph = CMat::Identity(s.cfg.K, s.cfg.K) - s.ref.h * s.ref.h.adjoint();
  for (int n = 0; n < grid.size; n += 13) {
    const CVec a = testutil::plain_steering(s.cfg.K, s.cfg.delta_f, grid.at(n));
    const double num = (a.adjoint() * Ph * a)(0).real();
    const double den = (a.adjoint() * Pn * a)(0).real() + 1e-12 * s.cfg.K;
    CHECK(sp.values(0, n) == doctest::Approx(num / den).epsilon(1e-8));
  }
  const Spectrum plain = music_spectrum(est, s.cfg, s.geom, grid);
  CHECK(plain.values.rows() == 1);
}

TEST_CASE("noiseless spectrum peaks at the dynamic delays") {
  auto s = synced(1, 0.0, 9, {9.0, 14.0, 18.5});
  const auto est = subspace_projector(s.H.data);
  const auto grid = SearchGrid::for_system(s.cfg, 4096);
  const auto peaks = pick_peaks(modified_music_spectrum(est, s.ref, s.cfg, s.geom, grid), 3);
  REQUIRE(peaks.peaks.size() == 3);
  CHECK_FALSE(peaks.shortfall);
  std::vector<double> got;
  for (const auto& p : peaks.peaks) got.push_back(delay_to_range(p.delay));
  std::sort(got.begin(), got.end());
  CHECK(got[0] == doctest::Approx(9.0).epsilon(1e-3));
  CHECK(got[1] == doctest::Approx(14.0).epsilon(1e-3));
  CHECK(got[2] == doctest::Approx(18.5).epsilon(1e-3));
}

TEST_CASE("peak picking on a hand-made spectrum") {
  SystemConfig cfg;
  Spectrum sp;
  sp.grid = SearchGrid::for_system(cfg, 256);
  sp.angles = RVec::Zero(1);
  sp.values.resize(1, 256);
  for (int n = 0; n < 256; ++n) sp.values(0, n) = 1.0 + 0.01 * std::sin(2 * kPi * n / 256);
  sp.values(0, 40) = 9.0;
  sp.values(0, 42) = 8.0;   // within the separation of the stronger peak
  sp.values(0, 100) = 5.0;
  sp.values(0, 255) = 7.0;  // the circular neighbour of bin 0
  const auto pl = pick_peaks(sp, 3, 5);
  REQUIRE(pl.peaks.size() == 3);
  CHECK(pl.peaks[0].delay_index == 40);
  CHECK(pl.peaks[1].delay_index == 255);
  CHECK(pl.peaks[2].delay_index == 100);
  // the background adds one broad maximum at bin 64; a fifth peak does not exist
  const auto more = pick_peaks(sp, 5, 5);
  CHECK(more.peaks.size() == 4);
  CHECK(more.shortfall);
}

TEST_CASE("two-dimensional spectrum separates targets by angle") {
  auto s = synced(3, 0.0, 13, {12.0, 12.0}, {-20.0, 20.0});
  const auto est = subspace_projector(s.H.data);
  const auto grid = SearchGrid::for_system(s.cfg, 1024);
  const RVec angles = angle_grid(-90, 90, 1);
  const auto pl = pick_peaks(modified_music_spectrum(est, s.ref, s.cfg, s.geom, grid, angles), 2);
  REQUIRE(pl.peaks.size() == 2);
  std::vector<double> aoa{pl.peaks[0].aoa * 180 / kPi, pl.peaks[1].aoa * 180 / kPi};
  std::sort(aoa.begin(), aoa.end());
  CHECK(aoa[0] == doctest::Approx(-20.0).epsilon(0.02));
  CHECK(aoa[1] == doctest::Approx(20.0).epsilon(0.02));
  for (const auto& p : pl.peaks) CHECK(delay_to_range(p.delay) == doctest::Approx(12.0).epsilon(2e-3));
}

TEST_CASE("CGS recovery with known delays is exact without noise") {
  auto s = synced(1, 0.0, 21, {10.0, 16.0});
  PeakList pl;
  for (const auto& d : s.sc.dynamics) {
    Peak p;
    p.delay = d.delay;
    pl.peaks.push_back(p);
  }
  const auto te = estimate_cgs(s.H, pl, s.cfg, s.geom);
  CHECK(te.cgs.rows() == 2);
  CHECK(te.po(0) == 0.0);
  CHECK(te.po.cwiseAbs().maxCoeff() < 1e-8);
  CHECK_FALSE(te.ill_conditioned);
  for (int l = 0; l < 2; ++l) {
    const CVec est = te.cgs.row(l).transpose();
    const CVec truth = s.sc.dynamics[l].cgs;
    // with zero offsets the only distortion is the static leakage: a constant translation
    const cd offset = (est - truth).mean();
    CHECK((est - truth - CVec::Constant(truth.size(), offset)).norm() < 1e-8 * truth.norm());
  }
}

TEST_CASE("rotation and translation fit") {
  const CVec truth = testutil::random_vector(40, 30);
  const cd rot = std::polar(1.0, 0.8), tr(0.2, -0.5);
  const CVec est = (truth - CVec::Constant(30, tr)) / rot;
  const auto fit = align_rotation_translation(est, truth);
  CHECK(std::abs(fit.rotation - rot) < 1e-10);
  CHECK(std::abs(fit.translation - tr) < 1e-10);
  CHECK((fit.aligned - truth).norm() < 1e-10);
  CHECK(gamma_beta(est, truth) == doctest::Approx(kGammaCapDb));
}

TEST_CASE("Doppler readout of a pure tone") {
  SystemConfig cfg;
  cfg.T = 100;
  const double v = 1.2;  // m/s
  const double fd = v / cfg.wavelength();
  CVec cgs(cfg.T);
  for (int t = 0; t < cfg.T; ++t) cgs(t) = std::exp(cd(0, 2 * kPi * fd * t * cfg.delta_t));
  const double bin = cfg.wavelength() / (1024 * cfg.delta_t);
  CHECK(std::abs(doppler_readout(cgs, cfg) - v) <= bin);
  CHECK(std::abs(doppler_readout(cgs.conjugate(), cfg) + v) <= bin);
}
