#include "ascsense/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "ascsense/baselines.hpp"
#include "ascsense/metrics.hpp"
#include "ascsense/outputs.hpp"
#include "ascsense/param_estimation.hpp"
#include "ascsense/rng.hpp"

namespace ascsense {

namespace {

using Clock = std::chrono::steady_clock;

const char* const kNames[kCriterionCount] = {
    "oracle equivalence",  "TO alignment accuracy", "absolute TO penalty",
    "delay accuracy gap",  "super-resolution",      "CGS quality gap",
    "property suite",      "MIMO smoke",
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int scaled(int n, const AcceptanceOptions& o) {
  return std::max(1, static_cast<int>(std::lround(n * o.trial_scale)));
}

ExperimentConfig base_config(const AcceptanceOptions& o, int trials) {
  ExperimentConfig c;
  c.seed = o.seed;
  c.workers = o.workers;
  c.trials = scaled(trials, o);
  return c;
}

const AggregateRow& row_for(const std::vector<AggregateRow>& rows, int point, Method m) {
  for (const auto& r : rows)
    if (r.point == point && r.method == m) return r;
  throw Error(Errc::invalid_argument, std::string("no aggregate for ") + to_string(m));
}

double db_gap(double err, double ref) { return 20.0 * std::log10(err / ref); }

// Accumulates named checks into a verdict and a compact detail string.
struct Verdict {
  bool ok = true;
  std::vector<std::string> notes;

  void check(bool cond, const std::string& note) {
    if (!cond) ok = false;
    notes.push_back(std::string(cond ? "" : "!") + note);
  }
  std::string detail() const {
    std::string s;
    for (const auto& n : notes) s += (s.empty() ? "" : "; ") + n;
    return s;
  }
};

CMat random_matrix(CounterRng& rng, int rows, int cols) {
  CMat X(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) X(i, j) = rng.complex_normal();
  return X;
}

// Direct evaluation of sum_j g_j^H P g_j with g_j = h_j .* conj(a(tau_n)).
RVec direct_quadratic(const CMat& H, const CMat& P, const SystemConfig& cfg, const SearchGrid& g) {
  RVec out(g.size);
  for (int n = 0; n < g.size; ++n) {
    const CMat G = compensate_to(H, g.at(n), cfg);
    out(n) = (G.adjoint() * P * G).trace().real();
  }
  return out;
}

double max_rel_error(const RVec& x, const RVec& ref) {
  return (x - ref).cwiseAbs().maxCoeff() / std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
}

int argmin(const RVec& v) {
  Eigen::Index i = 0;
  v.minCoeff(&i);
  return static_cast<int>(i);
}

// Grid index agreement; an exact tie in the direct values (relative 1e-12) accepts either.
bool same_argmin(const RVec& direct, int idx) {
  const int d = argmin(direct);
  if (d == idx) return true;
  return std::abs(direct(idx) - direct(d)) <= 1e-12 * std::max(std::abs(direct(d)), 1e-300);
}

int grid_index(double delay, const SearchGrid& g) {
  const double u = wrap_delay(delay - g.origin, g.period()) / g.step;
  return static_cast<int>(std::lround(u)) % g.size;
}

CriterionResult criterion_oracle(const AcceptanceOptions& o) {
  const auto t0 = Clock::now();
  CounterRng rng(CounterRng::derive_key(o.seed, 1, 0, Stream::aux));
  double worst = 0.0;
  int argmin_miss = 0;
  const int instances = 100;
  for (int i = 0; i < instances; ++i) {
    SystemConfig cfg;
    cfg.K = 2 + static_cast<int>(rng() % 3);
    const int Tw = 2 + static_cast<int>(rng() % 7);
    const int cols = 1 + static_cast<int>(rng() % 3);
    const SearchGrid g = SearchGrid::for_system(cfg, 64);
    const CMat W = random_matrix(rng, cfg.K, Tw);
    const CMat H = random_matrix(rng, cfg.K, cols);

    const SubspaceEstimate est = subspace_projector(W);
    const CMat Pn = est.noise_projector();
    const RVec d_sub = direct_quadratic(H, Pn, cfg, g);
    const RVec f_sub = kernel_spectrum(H, Pn, g);
    worst = std::max(worst, max_rel_error(f_sub, d_sub));
    RVec f_fac = RVec::Zero(g.size);
    for (int c = 0; c < cols; ++c) f_fac += fft_spectrum(H.col(c), est.noise_basis, g);
    worst = std::max(worst, max_rel_error(f_fac, d_sub));

    const CovarianceFactor cov = covariance_factor(W);
    const RVec d_cov = direct_quadratic(H, cov.kernel, cfg, g);
    const RVec f_cov = kernel_spectrum(H, cov.kernel, g);
    worst = std::max(worst, max_rel_error(f_cov, d_cov));

    if (!same_argmin(d_sub, argmin(f_sub))) ++argmin_miss;
    if (!same_argmin(d_cov, argmin(f_cov))) ++argmin_miss;
    const ToEstimate e_sub = estimate_relative_to_subspace(H, est, g);
    const ToEstimate e_cov = estimate_relative_to_covariance(H, cov, g);
    if (!same_argmin(d_sub, grid_index(e_sub.delay, g))) ++argmin_miss;
    if (!same_argmin(d_cov, grid_index(e_cov.delay, g))) ++argmin_miss;
  }
  CriterionResult r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  Verdict v;
  v.check(worst <= 1e-9, "max rel err " + fmt("%.2e", worst));
  v.check(argmin_miss == 0, "argmin mismatches " + std::to_string(argmin_miss));
  v.check(r.seconds < 10.0, "runtime < 10 s");
  r.passed = v.ok;
  r.detail = v.detail();
  return r;
}

CriterionResult criterion_to_accuracy(const AcceptanceOptions& o) {
  ExperimentConfig c = base_config(o, 200);
  c.snr_db = {15.0, 25.0};
  c.dyn_prop = {0.3};
  c.methods = {Method::prop_sub, Method::prop_cov, Method::simil, Method::evlp, Method::ifft};
  const auto t0 = Clock::now();
  const auto rows = aggregate(run_sweep(c));
  CriterionResult r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  Verdict v;
  for (Method m : {Method::prop_sub, Method::prop_cov}) {
    const double e15 = row_for(rows, 0, m).rel_to_median;
    const double e25 = row_for(rows, 1, m).rel_to_median;
    v.check(e15 <= 0.1, std::string(to_string(m)) + "@15 " + fmt("%.3f", e15) + " m");
    v.check(e25 <= 0.05, std::string(to_string(m)) + "@25 " + fmt("%.3f", e25) + " m");
  }
  for (Method m : {Method::simil, Method::evlp, Method::ifft}) {
    const double e25 = row_for(rows, 1, m).rel_to_median;
    v.check(e25 > 0.3, std::string(to_string(m)) + "@25 " + fmt("%.3f", e25) + " m");
  }
  v.check(r.seconds < 600.0, "runtime < 10 min");
  r.passed = v.ok;
  r.detail = v.detail();
  return r;
}

CriterionResult criterion_absolute_to(const AcceptanceOptions& o) {
  ExperimentConfig c = base_config(o, 200);
  c.snr_db = {25.0};
  c.dyn_prop = {0.3};
  c.methods = {Method::prop_sub, Method::prop_cov};
  const auto t0 = Clock::now();
  const auto rows = aggregate(run_sweep(c));
  CriterionResult r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  Verdict v;
  for (Method m : c.methods) {
    const auto& a = row_for(rows, 0, m);
    const double pen = a.abs_to_median - a.rel_to_median;
    v.check(pen <= 0.2, std::string(to_string(m)) + " abs-rel " + fmt("%.3f", pen) + " m");
  }
  r.passed = v.ok;
  r.detail = v.detail();
  return r;
}

CriterionResult criterion_delay_gap(const AcceptanceOptions& o) {
  ExperimentConfig c = base_config(o, 200);
  c.snr_db = {15.0, 25.0, 35.0};
  c.dyn_prop = {0.3, 0.8};
  c.methods = {Method::prop_sub, Method::prop_cov, Method::synchronized};
  const auto t0 = Clock::now();
  const SweepTable table = run_sweep(c);
  const auto rows = aggregate(table);
  CriterionResult r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  Verdict v;
  for (const auto& pt : table.points) {
    const double sync = row_for(rows, pt.index, Method::synchronized).delay_rel_median;
    for (Method m : {Method::prop_sub, Method::prop_cov}) {
      const double gap = db_gap(row_for(rows, pt.index, m).delay_rel_median, sync);
      v.check(gap <= 4.0, std::string(to_string(m)) + "@" + fmt("%.0f", pt.snr_db) + "/" +
                              fmt("%.1f", pt.dyn_prop) + " " + fmt("%+.1f", gap) + " dB");
    }
    if (pt.dyn_prop == 0.8 && pt.snr_db == 25.0)
      for (Method m : {Method::prop_sub, Method::prop_cov}) {
        const double e = row_for(rows, pt.index, m).delay_median;
        v.check(e <= 0.15, std::string(to_string(m)) + " abs delay " + fmt("%.3f", e) + " m");
      }
  }
  r.passed = v.ok;
  r.detail = v.detail();
  return r;
}

CriterionResult criterion_resolution(const AcceptanceOptions& o) {
  ExperimentConfig c = base_config(o, 200);
  c.snr_db = {25.0};
  c.dyn_prop = {0.3};
  c.scenario.n_dynamic = 2;
  c.tau_sep = {0.3, 0.6, 0.7, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4, 2.7, 3.0};
  const auto t0 = Clock::now();
  const SweepTable table = run_sweep(c);
  CriterionResult r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  auto point_at = [&](double sep) {
    for (const auto& p : table.points)
      if (p.tau_sep && std::abs(*p.tau_sep - sep) < 1e-9) return p.index;
    throw Error(Errc::invalid_argument, "missing separation point");
  };
  Verdict v;
  const double ps = resolution_probability(table, point_at(0.7), Method::synchronized);
  v.check(ps >= 0.85, "sync@0.7 " + fmt("%.2f", ps));
  for (Method m : {Method::prop_sub, Method::prop_cov}) {
    const double p = resolution_probability(table, point_at(0.9), m);
    v.check(p >= 0.85, std::string(to_string(m)) + "@0.9 " + fmt("%.2f", p));
  }
  for (Method m : {Method::simil, Method::evlp, Method::ifft}) {
    const double p = resolution_probability(table, point_at(0.9), m);
    v.check(p <= 0.5, std::string(to_string(m)) + "@0.9 " + fmt("%.2f", p));
    double worst = 0.0, worst_sep = 0.0;
    for (const auto& pt : table.points) {
      if (!(*pt.tau_sep < 3.0)) continue;
      const double q = resolution_probability(table, pt.index, m);
      if (q > worst) worst = q, worst_sep = *pt.tau_sep;
    }
    v.check(worst < 0.9, std::string(to_string(m)) + " max below 3.0 m " + fmt("%.2f", worst) +
                             "@" + fmt("%.1f", worst_sep));
  }
  v.check(r.seconds < 900.0, "runtime < 15 min");
  r.passed = v.ok;
  r.detail = v.detail();
  return r;
}

CriterionResult criterion_cgs_gap(const AcceptanceOptions& o) {
  ExperimentConfig c = base_config(o, 200);
  c.snr_db = {25.0};
  c.dyn_prop = {0.3};
  c.methods = {Method::prop_sub, Method::prop_cov, Method::synchronized};
  const auto t0 = Clock::now();
  const auto rows = aggregate(run_sweep(c));
  CriterionResult r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  Verdict v;
  const auto& sync = row_for(rows, 0, Method::synchronized);
  for (Method m : {Method::prop_sub, Method::prop_cov}) {
    const double gap = sync.gamma_median - row_for(rows, 0, m).gamma_median;
    v.check(gap <= 5.0, std::string(to_string(m)) + " gap " + fmt("%.1f", gap) + " dB");
  }
  const double below = sync.gamma_ideal_median - sync.gamma_median;
  v.check(below >= 1.0 && below <= 12.0, "ideal-sync " + fmt("%.1f", below) + " dB");
  r.passed = v.ok;
  r.detail = v.detail();
  return r;
}

// ---- property suite ----

struct Toy {
  SystemConfig cfg;
  ArrayGeometry geom;
  Scenario sc;
  CsiMatrix raw;
};

Toy toy_trial(std::uint64_t seed, double snr_db, int T = 60) {
  Toy t;
  t.cfg.T = T;
  t.geom = ArrayGeometry::single();
  ScenarioSpec spec;
  spec.snr_db = snr_db;
  t.sc = random_scenario(t.cfg, t.geom, spec, seed);
  t.cfg.noise_power = t.sc.noise_power;
  t.raw = synthesize_cpi(t.cfg, t.geom, t.sc.statics, t.sc.dynamics, t.sc.offsets, seed + 1);
  return t;
}

void property_shift_equivariance(Verdict& v, std::uint64_t seed) {
  const Toy t = toy_trial(seed, 25.0);
  const SearchGrid g = SearchGrid::for_system(t.cfg, 4096);
  CounterRng rng(CounterRng::derive_key(seed, 7, 1, Stream::aux));
  RVec shift = RVec::Zero(t.cfg.T);
  CsiMatrix moved = t.raw;
  for (int c = 1; c < t.cfg.T; ++c) {
    shift(c) = g.step * static_cast<double>(rng() % static_cast<std::uint64_t>(g.size));
    const double phase = rng.uniform(-kPi, kPi);
    moved.data.col(c) = compensate_to(CVec(t.raw.data.col(c)), -shift(c), t.cfg) *
                        std::polar(1.0, phase);
  }
  using Aligner = std::function<AlignmentResult(const CsiMatrix&)>;
  const std::vector<std::pair<std::string, Aligner>> aligners = {
      {"subspace", [&](const CsiMatrix& x) { return align_stream(x, t.cfg, {}); }},
      {"covariance",
       [&](const CsiMatrix& x) {
         AlignmentOptions a;
         a.method = AlignMethod::covariance;
         return align_stream(x, t.cfg, a);
       }},
      {"simil", [&](const CsiMatrix& x) { return align_similarity(x, t.cfg); }},
      {"evlp", [&](const CsiMatrix& x) { return align_envelope(x, t.cfg); }},
      {"ifft", [&](const CsiMatrix& x) { return align_ifft_peak(x, t.cfg); }},
  };
  for (const auto& [name, align] : aligners) {
    const RVec a = align(t.raw).relative_to;
    const RVec b = align(moved).relative_to;
    double worst = 0.0;
    for (int c = 0; c < t.cfg.T; ++c)
      worst = std::max(worst, circular_distance(b(c), a(c) + shift(c), g.period()));
    v.check(worst <= 1e-6 * g.step, "shift " + name + " " + fmt("%.1e", worst / g.step) + " bins");
  }
}

void property_projector(Verdict& v, std::uint64_t seed) {
  CounterRng rng(CounterRng::derive_key(seed, 7, 2, Stream::aux));
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = 4 + static_cast<int>(rng() % 12);
    const int d = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 2));
    CMat W = random_matrix(rng, n, d) * random_matrix(rng, d, 3 * n);
    W += 1e-3 * random_matrix(rng, n, 3 * n);
    const SubspaceEstimate est = subspace_projector(W);
    const CMat P = est.noise_projector();
    worst = std::max({worst, (P * P - P).norm(), (P - P.adjoint()).norm(),
                      (P * est.signal_basis).norm()});
  }
  v.check(worst <= 1e-10, "projector " + fmt("%.1e", worst));
}

void property_mdl(Verdict& v) {
  RVec flat = RVec::Constant(8, 1.0);
  RVec one(8), three(8);
  one << 100, 1, 1, 1, 1, 1, 1, 1;
  three << 400, 200, 100, 1, 1, 1, 1, 1;
  RVec all(4);
  all << 1000, 100, 10, 1;
  const bool ok = mdl_dimension(flat, 100) == 1 && mdl_dimension(one, 100) == 1 &&
                  mdl_dimension(three, 100) == 3 && mdl_dimension(all, 1000) == 3;
  v.check(ok, "MDL trivial cases");
}

// Profile likelihood of a single snapshot given the signal subspace: least-squares residual
// of the compensated snapshot against the signal basis.
RVec ls_residual_objective(const CVec& h, const CMat& U, const SystemConfig& cfg,
                           const SearchGrid& g) {
  RVec out(g.size);
  for (int n = 0; n < g.size; ++n) {
    const CVec y = compensate_to(h, g.at(n), cfg);
    const CVec x = U.colPivHouseholderQr().solve(y);
    out(n) = (y - U * x).squaredNorm();
  }
  return out;
}

// Gaussian negative log-likelihood with covariance R_w / T_w + s2 I; the log-det term is
// constant in the delay but kept so the objective is the full likelihood.
RVec gaussian_nll_objective(const CVec& h, const CMat& W, double s2, const SystemConfig& cfg,
                            const SearchGrid& g) {
  const Eigen::Index n = W.rows();
  const CMat C = W * W.adjoint() / static_cast<double>(W.cols()) + s2 * CMat::Identity(n, n);
  const Eigen::PartialPivLU<CMat> lu(C);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
  RVec out(g.size);
  for (int k = 0; k < g.size; ++k) {
    const CVec y = compensate_to(h, g.at(k), cfg);
    out(k) = logdet + (y.adjoint() * lu.solve(y))(0).real();
  }
  return out;
}

void property_likelihood(Verdict& v, std::uint64_t seed) {
  const Toy t = toy_trial(seed + 3, 25.0, 60);
  const SearchGrid g = SearchGrid::for_system(t.cfg, 512);
  const AlignmentResult al = align_stream(t.raw, t.cfg, {});
  const CMat W = al.aligned.data.leftCols(48);
  int miss = 0;
  for (int c = 48; c < t.cfg.T; ++c) {
    const CVec h = t.raw.data.col(c);
    const SubspaceEstimate est = subspace_projector(W);
    const RVec a = ls_residual_objective(h, est.signal_basis, t.cfg, g);
    const RVec fa = kernel_spectrum(h, est.noise_projector(), g);
    if (argmin(a) != argmin(fa) || max_rel_error(fa, a) > 1e-8) ++miss;
    const CovarianceFactor cov = covariance_factor(W);
    const RVec b = gaussian_nll_objective(h, W, cov.noise_power, t.cfg, g);
    const RVec fb = kernel_spectrum(h, cov.kernel, g);
    if (argmin(b) != argmin(fb)) ++miss;
  }
  v.check(miss == 0, "likelihood argmin mismatches " + std::to_string(miss));
}

void property_cgs_structure(Verdict& v, std::uint64_t seed) {
  Toy t = toy_trial(seed + 5, 25.0, 40);
  CounterRng rng(CounterRng::derive_key(seed, 7, 3, Stream::aux));
  OffsetSequence off = OffsetSequence::zeros(t.cfg.T);
  for (int c = 0; c < t.cfg.T; ++c) off.po(c) = rng.uniform(-kPi, kPi);
  t.cfg.noise_power = 0.0;
  CsiMatrix H = synthesize_cpi(t.cfg, t.geom, t.sc.statics, t.sc.dynamics, off, seed);
  H.stage = Stage::compensated;
  PeakList peaks;
  for (const auto& d : t.sc.dynamics) {
    Peak p;
    p.delay = d.delay;
    peaks.peaks.push_back(p);
  }
  const TargetEstimates te = estimate_cgs(H, peaks, t.cfg, t.geom);
  double worst_gamma = kGammaCapDb, worst_rot = 0.0;
  for (std::size_t l = 0; l < t.sc.dynamics.size(); ++l) {
    const CVec est = te.cgs.row(static_cast<Eigen::Index>(l)).transpose();
    const auto fit = align_rotation_translation(est, t.sc.dynamics[l].cgs);
    worst_gamma = std::min(worst_gamma, gamma_beta(est, t.sc.dynamics[l].cgs));
    worst_rot = std::max(worst_rot, std::abs(std::abs(fit.rotation) - 1.0));
  }
  v.check(worst_gamma >= 200.0 && worst_rot <= 1e-8,
          "noiseless CGS " + fmt("%.0f", worst_gamma) + " dB");
}

void property_po_invariance(Verdict& v, std::uint64_t seed) {
  const Toy t = toy_trial(seed + 9, 25.0, 60);
  CounterRng rng(CounterRng::derive_key(seed, 7, 4, Stream::aux));
  CMat X = t.raw.data;
  for (int c = 0; c < X.cols(); ++c) X.col(c) *= std::polar(1.0, rng.uniform(-kPi, kPi));
  ReferenceStaticResponse ref;
  ref.h = t.sc.statics.merged(t.cfg, t.geom).normalized();
  const SearchGrid g = SearchGrid::for_system(t.cfg, 1024);
  const Spectrum a = modified_music_spectrum(subspace_projector(t.raw.data), ref, t.cfg, t.geom, g);
  const Spectrum b = modified_music_spectrum(subspace_projector(X), ref, t.cfg, t.geom, g);
  const double err = max_rel_error(b.values.row(0).transpose(), a.values.row(0).transpose());
  v.check(err <= 1e-9, "PO invariance " + fmt("%.1e", err));
}

void property_m1_reduction(Verdict& v, std::uint64_t seed) {
  const Toy t = toy_trial(seed + 11, 25.0, 40);
  const ArrayGeometry ula = ArrayGeometry::uniform_linear(1, 0.5 * t.cfg.wavelength(),
                                                          t.cfg.wavelength());
  double worst = 0.0;
  for (double theta : {-0.7, 0.0, 0.4}) {
    const CVec a = steering_vector(t.cfg, 20e-9);
    worst = std::max({worst, (steering_vector_mimo(t.cfg, ula, theta, 20e-9) - a).norm(),
                      (steering_vector_mimo(t.cfg, t.geom, theta, 20e-9) - a).norm()});
  }
  const CsiMatrix x = synthesize_cpi(t.cfg, ula, t.sc.statics, t.sc.dynamics, t.sc.offsets, seed);
  const CsiMatrix y =
      synthesize_cpi(t.cfg, t.geom, t.sc.statics, t.sc.dynamics, t.sc.offsets, seed);
  worst = std::max(worst, (x.data - y.data).norm() / y.data.norm());

  ReferenceStaticResponse ref;
  ref.h = t.sc.statics.merged(t.cfg, t.geom).normalized();
  const SearchGrid g = SearchGrid::for_system(t.cfg, 512);
  const SubspaceEstimate est = subspace_projector(y.data);
  const Spectrum one = modified_music_spectrum(est, ref, t.cfg, t.geom, g);
  const Spectrum two = modified_music_spectrum(est, ref, t.cfg, ula, g, angle_grid(-60, 60, 30));
  for (Eigen::Index r = 0; r < two.values.rows(); ++r)
    worst = std::max(worst, max_rel_error(two.values.row(r).transpose(),
                                          one.values.row(0).transpose()));
  v.check(worst <= 1e-9, "M=1 reduction " + fmt("%.1e", worst));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void property_determinism(Verdict& v, std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.trials = 3;
  c.system.T = 60;
  namespace fs = std::filesystem;
  const fs::path root =
      fs::temp_directory_path() / ("ascsense_det_" + std::to_string(splitmix64(seed ^ 0x5eed)));
  std::vector<std::string> runs;
  for (int workers : {1, 2}) {
    c.workers = workers;
    const fs::path dir = root / std::to_string(workers);
    emit_outputs(run_sweep(c), dir.string());
    runs.push_back(slurp(dir / "trials.csv") + slurp(dir / "targets.csv") +
                   slurp(dir / "aggregates.csv"));
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  v.check(!runs[0].empty() && runs[0] == runs[1], "determinism");
}

CriterionResult criterion_properties(const AcceptanceOptions& o) {
  const auto t0 = Clock::now();
  Verdict v;
  const std::vector<std::function<void()>> steps = {
      [&] { property_shift_equivariance(v, o.seed); }, [&] { property_projector(v, o.seed); },
      [&] { property_mdl(v); },                        [&] { property_likelihood(v, o.seed); },
      [&] { property_cgs_structure(v, o.seed); },      [&] { property_po_invariance(v, o.seed); },
      [&] { property_m1_reduction(v, o.seed); },       [&] { property_determinism(v, o.seed); },
  };
  for (const auto& s : steps) {
    try {
      s();
    } catch (const std::exception& e) {
      v.check(false, std::string("error: ") + e.what());
    }
  }
  CriterionResult r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  v.check(r.seconds < 60.0, "runtime < 60 s");
  r.passed = v.ok;
  r.detail = v.detail();
  return r;
}

CriterionResult criterion_mimo(const AcceptanceOptions& o) {
  ExperimentConfig c = base_config(o, 25);
  c.system.M = 3;
  c.scenario.n_dynamic = 2;
  c.scenario.fixed_dynamic_ranges = {12.0, 12.0};
  c.scenario.fixed_dynamic_aoas = {-20.0 * kPi / 180.0, 20.0 * kPi / 180.0};
  c.snr_db = {25.0, 35.0, 50.0, 200.0};
  c.dyn_prop = {0.3};
  c.methods = {Method::prop_sub, Method::prop_cov};
  const auto t0 = Clock::now();
  const SweepTable table = run_sweep(c);
  CriterionResult r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  Verdict v;
  for (Method m : c.methods) {
    int ok = 0, n = 0;
    for (const auto& rec : table.trials)
      if (rec.method == m) ++n, ok += rec.resolved ? 1 : 0;
    const double p = n ? static_cast<double>(ok) / n : 0.0;
    v.check(p >= 0.9, std::string(to_string(m)) + " " + fmt("%.2f", p) + " of " +
                          std::to_string(n));
  }
  r.passed = v.ok;
  r.detail = v.detail();
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  using Fn = CriterionResult (*)(const AcceptanceOptions&);
  static constexpr Fn fns[kCriterionCount] = {
      criterion_oracle,    criterion_to_accuracy, criterion_absolute_to, criterion_delay_gap,
      criterion_resolution, criterion_cgs_gap,    criterion_properties,  criterion_mimo,
  };
  if (id < 1 || id > kCriterionCount)
    throw Error(Errc::invalid_argument, "criterion id must be in 1.." + std::to_string(kCriterionCount));
  CriterionResult r;
  const auto t0 = Clock::now();
  try {
    r = fns[id - 1](opts);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  r.id = id;
  r.name = kNames[id - 1];
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, opts));
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s << "criterion " << r.id << " [" << r.name << "]: " << (r.passed ? "PASS" : "FAIL") << " ("
    << r.detail << ") t=" << fmt("%.1f", r.seconds) << "s";
  return s.str();
}

}  // namespace ascsense
