#include "ascsense/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>
#include <tuple>

#include "ascsense/metrics.hpp"
#include "ascsense/rng.hpp"

namespace ascsense {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDeg = 180.0 / kPi;

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::prop_sub: return "prop_sub";
    case Method::prop_cov: return "prop_cov";
    case Method::simil: return "simil";
    case Method::evlp: return "evlp";
    case Method::ifft: return "ifft";
    case Method::synchronized: return "synchronized";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods())
    if (name == to_string(m)) return m;
  throw Error(Errc::invalid_argument, "unknown method '" + name + "'");
}

std::vector<Method> all_methods() {
  return {Method::prop_sub, Method::prop_cov, Method::simil,
          Method::evlp,     Method::ifft,     Method::synchronized};
}

void ExperimentConfig::validate() const {
  system.validate();
  if (trials < 1) throw Error(Errc::invalid_argument, "trials must be >= 1");
  if (workers < 1) throw Error(Errc::invalid_argument, "workers must be >= 1");
  if (methods.empty()) throw Error(Errc::invalid_argument, "no methods selected");
  if (snr_db.empty() || dyn_prop.empty()) throw Error(Errc::invalid_argument, "empty sweep axis");
  for (double s : tau_sep)
    if (!(s > 0.0)) throw Error(Errc::invalid_argument, "tau_sep values must be > 0");
  if (!tau_sep.empty() && scenario.n_dynamic != 2)
    throw Error(Errc::invalid_argument, "tau_sep sweeps need exactly two dynamic paths");
  if (!(array_spacing > 0.0)) throw Error(Errc::invalid_argument, "array spacing must be > 0");
  if (calibration.T_s < system.K) throw Error(Errc::invalid_argument, "calibration T_s must be >= K");
  if (peak_separation < 1) throw Error(Errc::invalid_argument, "peak separation must be >= 1");
  if (!(aoa_step_deg > 0.0) || aoa_max_deg < aoa_min_deg)
    throw Error(Errc::invalid_argument, "invalid AoA grid");
  SearchGrid::for_system(system, align.grid_size).validate(system.K);
}

ArrayGeometry make_geometry(const ExperimentConfig& cfg) {
  if (cfg.system.M == 1) return ArrayGeometry::single();
  const double lambda = cfg.system.wavelength();
  return ArrayGeometry::uniform_linear(cfg.system.M, cfg.array_spacing * lambda, lambda);
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> out;
  std::vector<std::optional<double>> seps;
  if (cfg.tau_sep.empty()) seps.push_back(std::nullopt);
  for (double s : cfg.tau_sep) seps.push_back(s);
  for (double snr : cfg.snr_db)
    for (double dyn : cfg.dyn_prop)
      for (const auto& sep : seps) {
        SweepPoint p;
        p.index = static_cast<int>(out.size());
        p.snr_db = snr;
        p.dyn_prop = dyn;
        p.tau_sep = sep;
        out.push_back(p);
      }
  return out;
}

PipelineOptions pipeline_options(const ExperimentConfig& cfg) {
  PipelineOptions o;
  o.align = cfg.align;
  if (cfg.system.M > 1) o.angles = angle_grid(cfg.aoa_min_deg, cfg.aoa_max_deg, cfg.aoa_step_deg);
  o.n_targets = cfg.scenario.n_dynamic;
  o.mdl_target_count = cfg.mdl_target_count;
  o.peak_separation = cfg.peak_separation;
  return o;
}

PipelineOutput run_pipeline(Method method, const CsiMatrix& raw, const ReferenceStaticResponse& ref,
                            const SystemConfig& cfg, const ArrayGeometry& geom,
                            const PipelineOptions& opts) {
  const SearchGrid grid = SearchGrid::for_system(cfg, opts.align.grid_size);
  PipelineOutput out;
  Spectrum spec;
  CsiMatrix H;
  if (method == Method::synchronized) {
    out.alignment.aligned = raw;
    out.alignment.relative_to = RVec::Zero(raw.cols());
    const SubspaceEstimate est = subspace_projector(raw.data);
    out.subspace_dimension = est.dimension;
    spec = modified_music_spectrum(est, ref, cfg, geom, grid, opts.angles);
    H = raw;
  } else {
    switch (method) {
      case Method::prop_sub:
      case Method::prop_cov: {
        AlignmentOptions a = opts.align;
        a.method = method == Method::prop_sub ? AlignMethod::subspace : AlignMethod::covariance;
        out.alignment = align_stream(raw, cfg, a);
        break;
      }
      case Method::simil:
        out.alignment = align_similarity(raw, cfg, opts.align.grid_size);
        break;
      case Method::evlp:
        out.alignment = align_envelope(raw, cfg, opts.align.grid_size);
        break;
      case Method::ifft:
        out.alignment = align_ifft_peak(raw, cfg, opts.align.grid_size);
        break;
      case Method::synchronized:
        break;
    }
    const CompensatedCpi cc = estimate_to_residual(out.alignment.aligned, ref, cfg, grid);
    out.residual = cc.residual;
    out.subspace_dimension = cc.subspace.dimension;
    spec = modified_music_spectrum(cc, ref, cfg, geom, grid, opts.angles);
    H = cc.H;
  }
  const int L = opts.mdl_target_count ? std::max(1, out.subspace_dimension - 1) : opts.n_targets;
  out.peaks = pick_peaks(spec, L, opts.peak_separation);
  out.targets = estimate_cgs(H, out.peaks, cfg, geom);
  return out;
}

namespace {

std::uint64_t trial_key(const ExperimentConfig& cfg, const SweepPoint& pt, int trial, Stream s) {
  return CounterRng::derive_key(cfg.seed, static_cast<std::uint64_t>(pt.index),
                                static_cast<std::uint64_t>(trial), s);
}

}  // namespace

TrialInputs synthesize_trial(const ExperimentConfig& cfg, const SweepPoint& pt, int trial,
                             bool with_reference) {
  TrialInputs in;
  in.system = cfg.system;
  in.geometry = make_geometry(cfg);
  ScenarioSpec spec = cfg.scenario;
  spec.snr_db = pt.snr_db;
  spec.dyn_proportion = spec.n_dynamic > 0 ? pt.dyn_prop : 0.0;
  if (pt.tau_sep) spec.target_separation = *pt.tau_sep;

  in.scenario = random_scenario(in.system, in.geometry, spec, trial_key(cfg, pt, trial, Stream::scenario));
  in.system.noise_power = in.scenario.noise_power;
  const Scenario& sc = in.scenario;
  in.raw = synthesize_cpi(in.system, in.geometry, sc.statics, sc.dynamics, sc.offsets,
                          trial_key(cfg, pt, trial, Stream::noise));
  if (!with_reference) return in;
  try {
    CounterRng crng(trial_key(cfg, pt, trial, Stream::calibration));
    ClockErrorLaw law;
    law.mean = crng.uniform(-cfg.calibration.clock_error_span, cfg.calibration.clock_error_span);
    law.jitter = cfg.calibration.clock_jitter;
    const BidirectionalTrace trace = synthesize_bidirectional(
        in.system, in.geometry, sc.statics, cfg.calibration.T_s,
        cfg.calibration.timestamp_noise_std, law, trial_key(cfg, pt, trial, Stream::clock));
    CalibrationOptions copts;
    copts.align = cfg.align;
    copts.align.method = AlignMethod::subspace;
    copts.clock_search_range = cfg.calibration.search_range;
    in.reference = acquire_reference(trace, in.system, copts);
  } catch (const Error& e) {
    in.reference_error = e.what();
  }
  return in;
}

CsiMatrix synchronized_cpi(const ExperimentConfig& cfg, const SweepPoint& pt, int trial,
                           const TrialInputs& in) {
  const Scenario& sc = in.scenario;
  return synthesize_cpi(in.system, in.geometry, sc.statics, sc.dynamics,
                        OffsetSequence::zeros(in.system.T), trial_key(cfg, pt, trial, Stream::noise));
}

namespace {

struct TrialRows {
  std::vector<MetricRecord> trials;
  std::vector<TargetRecord> targets;
};

std::vector<double> to_std(const RVec& v) { return {v.data(), v.data() + v.size()}; }

void append_flag(std::string& flags, const std::string& f) {
  if (!flags.empty()) flags += ';';
  flags += f;
}

void score(const ExperimentConfig& cfg, const SweepPoint& pt, const Scenario& sc,
           const SystemConfig& sys, const PipelineOutput& po, MetricRecord& r,
           std::vector<TargetRecord>& targets) {
  const double period = sys.alias_period();
  double common = 0.0;
  if (r.method != Method::synchronized) {
    const ToErrors te = to_errors(sc.offsets.to, po.alignment.relative_to, po.residual, period);
    common = te.common;
    r.rel_to_error = delay_to_range(median(to_std(te.relative)));
    r.abs_to_error = delay_to_range(median(to_std(te.absolute)));
  } else {
    r.rel_to_error = 0.0;
    r.abs_to_error = 0.0;
  }
  if (po.alignment.degenerate_count > 0)
    append_flag(r.flags, "degenerate_align=" + std::to_string(po.alignment.degenerate_count));
  const TargetEstimates& te = po.targets;
  if (po.peaks.shortfall) append_flag(r.flags, "shortfall");
  if (te.ill_conditioned) append_flag(r.flags, "ill_conditioned");
  if (te.rank_deficient) append_flag(r.flags, "rank_deficient");
  if (te.no_static_energy) append_flag(r.flags, "no_static_energy");
  r.n_peaks = static_cast<int>(te.delays.size());

  const int L = static_cast<int>(sc.dynamics.size());
  const int E = r.n_peaks;
  const bool mimo = sys.M > 1;
  const double shift = common - po.residual;  // common delay shift left in the compensated CPI
  RMat rel(L, E), aoa(L, E), cost(L, E);
  const double delay_res = kSpeedOfLight / (sys.K * sys.delta_f);
  const double angle_res = 2.0 / sys.M;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < E; ++j) {
      const double tau = sc.dynamics[i].delay_at(0, sys);
      rel(i, j) = delay_to_range(circular_distance(te.delays[j] - shift, tau, period));
      aoa(i, j) = std::abs(te.aoas[j] - sc.dynamics[i].aoa);
      cost(i, j) = rel(i, j) / delay_res + (mimo ? aoa(i, j) / angle_res : 0.0);
    }
  const std::vector<int> match = match_targets(cost);

  double delay_tol = cfg.delay_tolerance;
  if (pt.tau_sep) delay_tol = *pt.tau_sep / 2.0;
  double aoa_tol = std::numeric_limits<double>::infinity();
  if (mimo && L >= 2)
    for (int i = 0; i < L; ++i)
      for (int k = i + 1; k < L; ++k)
        aoa_tol = std::min(aoa_tol, std::abs(sc.dynamics[i].aoa - sc.dynamics[k].aoa) / 2.0);

  bool ok = !po.peaks.shortfall && L > 0;
  std::vector<double> d_rel, d_abs, gam;
  double g_ideal_sum = 0.0;
  for (int i = 0; i < L; ++i) {
    const DynamicPath& d = sc.dynamics[i];
    const double tau = d.delay_at(0, sys);
    TargetRecord t;
    t.point = r.point;
    t.trial = r.trial;
    t.method = r.method;
    t.target = i;
    t.true_range = delay_to_range(tau);
    t.true_aoa_deg = d.aoa * kDeg;
    t.gamma_ideal_db = gamma_ideal(d.cgs, sys.rows(), sys.noise_power);
    g_ideal_sum += t.gamma_ideal_db;
    const int j = match[i];
    if (j < 0) {
      t.est_range = t.delay_rel_error = t.delay_abs_error = kNaN;
      t.est_aoa_deg = t.aoa_error_deg = t.gamma_db = kNaN;
      ok = false;
    } else {
      t.est_range = delay_to_range(te.delays[j]);
      t.delay_rel_error = rel(i, j);
      t.delay_abs_error = delay_to_range(circular_distance(te.delays[j], tau, period));
      t.est_aoa_deg = te.aoas[j] * kDeg;
      t.aoa_error_deg = aoa(i, j) * kDeg;
      t.gamma_db = gamma_beta(te.cgs.row(j).transpose(), d.cgs);
      if (!(rel(i, j) < delay_tol)) ok = false;
      if (mimo && !(aoa(i, j) < aoa_tol)) ok = false;
      d_rel.push_back(t.delay_rel_error);
      d_abs.push_back(t.delay_abs_error);
      gam.push_back(t.gamma_db);
    }
    targets.push_back(t);
  }
  r.resolved = ok;
  r.delay_rel_error = median(d_rel);
  r.delay_abs_error = median(d_abs);
  r.gamma_db = median(gam);
  r.gamma_ideal_db = L > 0 ? g_ideal_sum / L : kNaN;
}

TrialRows run_trial(const ExperimentConfig& cfg, const PipelineOptions& popts,
                    const SweepPoint& pt, int trial) {
  TrialRows rows;
  auto blank = [&](Method m) {
    MetricRecord r;
    r.point = pt.index;
    r.trial = trial;
    r.method = m;
    r.snr_db = pt.snr_db;
    r.dyn_prop = pt.dyn_prop;
    r.tau_sep = pt.tau_sep ? *pt.tau_sep : kNaN;
    r.rel_to_error = r.abs_to_error = r.delay_rel_error = r.delay_abs_error = kNaN;
    r.gamma_db = r.gamma_ideal_db = kNaN;
    return r;
  };

  const bool needs_ref = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                     [](Method m) { return m != Method::synchronized; });
  TrialInputs in;
  try {
    in = synthesize_trial(cfg, pt, trial, needs_ref);
  } catch (const Error& e) {
    for (Method m : cfg.methods) {
      MetricRecord r = blank(m);
      append_flag(r.flags, std::string("error:") + e.what());
      rows.trials.push_back(r);
    }
    return rows;
  }
  const SystemConfig& sys = in.system;
  const ArrayGeometry& geom = in.geometry;
  const Scenario& sc = in.scenario;

  for (Method m : cfg.methods) {
    MetricRecord r = blank(m);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      PipelineOutput po;
      if (m == Method::synchronized) {
        const CsiMatrix clean = synchronized_cpi(cfg, pt, trial, in);
        ReferenceStaticResponse truth;
        truth.h = sc.statics.merged(sys, geom).normalized();
        po = run_pipeline(m, clean, truth, sys, geom, popts);
      } else {
        if (in.reference.empty())
          throw Error(Errc::degenerate, "calibration failed: " + in.reference_error);
        po = run_pipeline(m, in.raw, in.reference, sys, geom, popts);
      }
      score(cfg, pt, sc, sys, po, r, rows.targets);
    } catch (const Error& e) {
      append_flag(r.flags, std::string("error:") + e.what());
      r.resolved = false;
    }
    r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.trials.push_back(r);
  }
  return rows;
}

}  // namespace

SweepTable run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepTable table;
  table.points = sweep_points(cfg);
  const PipelineOptions popts = pipeline_options(cfg);
  const std::size_t n_jobs = table.points.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRows> results(n_jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < n_jobs; j = next++) {
      const auto& pt = table.points[j / cfg.trials];
      results[j] = run_trial(cfg, popts, pt, static_cast<int>(j % cfg.trials));
    }
  };
  const int n_threads = std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(1, n_jobs)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  for (auto& r : results) {
    for (auto& m : r.trials) table.trials.push_back(std::move(m));
    for (auto& t : r.targets) table.targets.push_back(std::move(t));
  }
  auto key = [](const auto& r) { return std::tuple(r.point, r.trial, static_cast<int>(r.method)); };
  std::stable_sort(table.trials.begin(), table.trials.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::stable_sort(table.targets.begin(), table.targets.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return table;
}

double resolution_probability(const SweepTable& table, int point, Method method) {
  std::vector<bool> s;
  for (const auto& r : table.trials)
    if (r.point == point && r.method == method) s.push_back(r.resolved);
  return resolution_probability(s);
}

}  // namespace ascsense
