#include "ascsense/signal_model.hpp"

#include <cmath>
#include <string>

#include "ascsense/rng.hpp"

namespace ascsense {

void SystemConfig::validate() const {
  if (K < 2) throw Error(Errc::invalid_argument, "K must be >= 2");
  if (!(delta_f > 0.0)) throw Error(Errc::invalid_argument, "delta_f must be > 0");
  if (T < 1) throw Error(Errc::invalid_argument, "T must be >= 1");
  if (M < 1) throw Error(Errc::invalid_argument, "M must be >= 1");
  if (!(delta_t > 0.0)) throw Error(Errc::invalid_argument, "delta_t must be > 0");
  if (!(carrier_freq > 0.0)) throw Error(Errc::invalid_argument, "carrier_freq must be > 0");
  if (!(noise_power >= 0.0)) throw Error(Errc::invalid_argument, "noise_power must be >= 0");
  if (T * delta_t > cpi_limit)
    throw Error(Errc::invalid_argument, "T * delta_t exceeds the CPI limit");
}

ArrayGeometry ArrayGeometry::single() { return ArrayGeometry{}; }

ArrayGeometry ArrayGeometry::uniform_linear(int M, double spacing, double wavelength) {
  if (M < 1) throw Error(Errc::invalid_argument, "array needs at least one element");
  if (!(wavelength > 0.0)) throw Error(Errc::invalid_argument, "wavelength must be > 0");
  ArrayGeometry g;
  g.kind_ = Kind::uniform_linear;
  g.M_ = M;
  g.spacing_ = spacing;
  g.wavelength_ = wavelength;
  return g;
}

ArrayGeometry ArrayGeometry::half_wavelength_ula(int M, double carrier_freq) {
  const double lambda = kSpeedOfLight / carrier_freq;
  if (M == 1) return single();
  return uniform_linear(M, lambda / 2.0, lambda);
}

RVec ArrayGeometry::phases(double theta) const {
  RVec p = RVec::Zero(M_);
  if (kind_ == Kind::single) return p;
  const double k = kTwoPi * spacing_ * std::sin(theta) / wavelength_;
  for (int m = 0; m < M_; ++m) p(m) = k * m;
  return p;
}

CVec ArrayGeometry::response(double theta) const {
  const RVec p = phases(theta);
  CVec out(M_);
  for (int m = 0; m < M_; ++m) out(m) = std::polar(1.0, p(m));
  return out;
}

CVec StaticPathSet::merged(const SystemConfig& cfg, const ArrayGeometry& geom) const {
  if (gains.size() != delays.size())
    throw Error(Errc::dimension_mismatch, "static gains/delays length mismatch");
  if (aoas.size() != 0 && aoas.size() != delays.size())
    throw Error(Errc::dimension_mismatch, "static aoas length mismatch");
  CVec h = CVec::Zero(cfg.rows());
  for (int l = 0; l < size(); ++l) {
    const double theta = aoas.size() ? aoas(l) : 0.0;
    h += gains(l) * steering_vector_mimo(cfg, geom, theta, delays(l));
  }
  return h;
}

OffsetSequence OffsetSequence::zeros(int T) { return {RVec::Zero(T), RVec::Zero(T)}; }

const char* to_string(Stage s) {
  switch (s) {
    case Stage::raw: return "raw";
    case Stage::aligned: return "aligned";
    case Stage::compensated: return "compensated";
  }
  return "?";
}

void CsiMatrix::advance(Stage next) {
  if (static_cast<int>(next) != static_cast<int>(stage) + 1)
    throw Error(Errc::invalid_argument, std::string("illegal stage transition ") +
                                            to_string(stage) + " -> " + to_string(next));
  stage = next;
}

CVec steering_vector(const SystemConfig& cfg, double tau) {
  // Reduce first so large delays keep full phase precision.
  const double t = wrap_delay(tau, cfg.alias_period());
  CVec a(cfg.K);
  for (int k = 0; k < cfg.K; ++k) a(k) = std::polar(1.0, -kTwoPi * k * cfg.delta_f * t);
  return a;
}

CVec steering_vector_mimo(const SystemConfig& cfg, const ArrayGeometry& geom, double theta,
                          double tau) {
  if (geom.size() != cfg.M)
    throw Error(Errc::dimension_mismatch, "array size does not match cfg.M");
  const CVec a = steering_vector(cfg, tau);
  const CVec s = geom.response(theta);
  CVec out(cfg.rows());
  for (int m = 0; m < cfg.M; ++m) out.segment(m * cfg.K, cfg.K) = s(m) * a;
  return out;
}

CsiMatrix synthesize_cpi(const SystemConfig& cfg, const ArrayGeometry& geom,
                         const StaticPathSet& statics, const DynamicPathSet& dynamics,
                         const OffsetSequence& offsets, std::uint64_t seed, int cpi) {
  cfg.validate();
  if (offsets.to.size() != cfg.T || offsets.po.size() != cfg.T)
    throw Error(Errc::dimension_mismatch, "offset sequence length must equal T");
  for (const auto& d : dynamics)
    if (d.cgs.size() != cfg.T) throw Error(Errc::dimension_mismatch, "CGS length must equal T");

  const CVec hs = statics.merged(cfg, geom);
  std::vector<CVec> responses;
  responses.reserve(dynamics.size());
  for (const auto& d : dynamics)
    responses.push_back(steering_vector_mimo(cfg, geom, d.aoa, d.delay_at(cpi, cfg)));

  CounterRng rng(seed);
  CsiMatrix out;
  out.data.resize(cfg.rows(), cfg.T);
  out.cpi_index = cpi;
  for (int t = 0; t < cfg.T; ++t) {
    CVec col = hs;
    for (std::size_t l = 0; l < dynamics.size(); ++l) col += dynamics[l].cgs(t) * responses[l];
    const CVec async = std::polar(1.0, offsets.po(t)) *
                       steering_vector_mimo(cfg, geom, 0.0, offsets.to(t));
    col = col.cwiseProduct(async);
    if (cfg.noise_power > 0.0)
      for (int r = 0; r < cfg.rows(); ++r) col(r) += rng.complex_normal(cfg.noise_power);
    out.data.col(t) = col;
  }
  return out;
}

namespace {

double rayleigh_with_mean(CounterRng& rng, double mean) {
  const double sigma = mean / std::sqrt(kPi / 2.0);
  return sigma * std::sqrt(-2.0 * std::log(1.0 - rng.uniform()));
}

}  // namespace

Scenario random_scenario(const SystemConfig& cfg, const ArrayGeometry& geom,
                         const ScenarioSpec& spec, std::uint64_t seed) {
  cfg.validate();
  if (spec.n_static < 1) throw Error(Errc::infeasible, "at least one static path is required");
  if (spec.n_dynamic < 0) throw Error(Errc::infeasible, "negative dynamic path count");
  if (spec.n_dynamic > 0 && !(spec.dyn_proportion > 0.0 && spec.dyn_proportion < 1.0))
    throw Error(Errc::infeasible, "dynamic power proportion must lie in (0, 1)");
  if (spec.n_dynamic == 0 && spec.dyn_proportion != 0.0)
    throw Error(Errc::infeasible, "non-zero dynamic proportion without dynamic paths");
  if (spec.target_separation && spec.n_dynamic != 2)
    throw Error(Errc::infeasible, "target separation layout needs exactly two dynamic paths");
  if (!spec.fixed_dynamic_ranges.empty() &&
      static_cast<int>(spec.fixed_dynamic_ranges.size()) != spec.n_dynamic)
    throw Error(Errc::infeasible, "fixed dynamic ranges must match n_dynamic");
  if (!spec.fixed_dynamic_aoas.empty() &&
      static_cast<int>(spec.fixed_dynamic_aoas.size()) != spec.n_dynamic)
    throw Error(Errc::infeasible, "fixed dynamic AoAs must match n_dynamic");

  CounterRng rng(seed);
  const bool mimo = cfg.M > 1;
  Scenario sc;

  auto power_for = [&](double range) {
    const double r = std::max(range, spec.min_power_range);
    return 1.0 / (r * r);
  };

  auto& st = sc.statics;
  st.delays.resize(spec.n_static);
  st.gains.resize(spec.n_static);
  if (mimo) st.aoas.resize(spec.n_static);
  for (int l = 0; l < spec.n_static; ++l) {
    const double range = rayleigh_with_mean(rng, spec.static_mean_range);
    st.delays(l) = range_to_delay(range);
    st.gains(l) = rng.complex_normal(power_for(range));
    if (mimo) st.aoas(l) = rng.uniform(-spec.static_aoa_span, spec.static_aoa_span);
  }
  const double p_dyn = spec.n_dynamic > 0 ? spec.dyn_proportion : 0.0;
  {
    const CVec hs = st.merged(cfg, geom);
    const double ps = hs.squaredNorm() / cfg.rows();
    if (!(ps > 0.0)) throw Error(Errc::degenerate, "static response has zero energy");
    st.gains *= std::sqrt((1.0 - p_dyn) / ps);
  }

  std::vector<double> ranges(spec.n_dynamic);
  if (!spec.fixed_dynamic_ranges.empty()) {
    ranges = spec.fixed_dynamic_ranges;
  } else if (spec.target_separation) {
    const double sep = *spec.target_separation;
    const double lo = spec.dynamic_range_min + sep / 2.0;
    const double hi = std::max(lo, spec.dynamic_range_max - sep / 2.0);
    const double centre = rng.uniform(lo, hi);
    ranges = {centre - sep / 2.0, centre + sep / 2.0};
  } else {
    for (auto& r : ranges) r = rng.uniform(spec.dynamic_range_min, spec.dynamic_range_max);
  }
  std::vector<double> var(spec.n_dynamic);
  double var_sum = 0.0;
  for (int l = 0; l < spec.n_dynamic; ++l) var_sum += (var[l] = power_for(ranges[l]));
  for (int l = 0; l < spec.n_dynamic; ++l) {
    DynamicPath d;
    d.delay = range_to_delay(ranges[l]);
    const double speed = rng.uniform(-spec.max_speed, spec.max_speed);
    d.delay_rate = speed / kSpeedOfLight;
    if (!spec.fixed_dynamic_aoas.empty())
      d.aoa = spec.fixed_dynamic_aoas[l];
    else if (mimo)
      d.aoa = rng.uniform(-spec.dynamic_aoa_span, spec.dynamic_aoa_span);
    const double v = p_dyn * var[l] / var_sum;
    d.cgs.resize(cfg.T);
    for (int t = 0; t < cfg.T; ++t) d.cgs(t) = rng.complex_normal(v);
    sc.dynamics.push_back(std::move(d));
  }

  auto& off = sc.offsets;
  off.to.resize(cfg.T);
  off.po.resize(cfg.T);
  const double period = cfg.alias_period();
  if (spec.offset_law == OffsetLaw::iid_uniform) {
    for (int t = 0; t < cfg.T; ++t) {
      off.to(t) = rng.uniform() * period;
      off.po(t) = rng.uniform(-kPi, kPi);
    }
  } else {
    double to = rng.uniform() * period;
    double po = rng.uniform(-kPi, kPi);
    for (int t = 0; t < cfg.T; ++t) {
      off.to(t) = wrap_delay(to, period);
      off.po(t) = wrap_phase(po);
      to += spec.drift_to_std * rng.normal();
      po += spec.drift_po_std * rng.normal();
    }
  }

  sc.noise_power = std::pow(10.0, -spec.snr_db / 10.0);
  return sc;
}

BidirectionalTrace synthesize_bidirectional(const SystemConfig& cfg, const ArrayGeometry& geom,
                                            const StaticPathSet& statics, int T_s,
                                            double timestamp_noise_std,
                                            const ClockErrorLaw& clock, std::uint64_t seed) {
  cfg.validate();
  if (T_s < cfg.K)
    throw Error(Errc::invalid_argument, "calibration needs at least K exchanges");
  if (!(timestamp_noise_std >= 0.0))
    throw Error(Errc::invalid_argument, "timestamp noise std must be >= 0");

  CounterRng rng(seed);
  const double period = cfg.alias_period();
  const CVec hs = statics.merged(cfg, geom);
  // Reverse link: same paths, arbitrary complex scale.
  const cd reverse_scale = std::polar(1.0, rng.uniform(-kPi, kPi));
  constexpr double kTurnaround = 100e-6;

  BidirectionalTrace tr;
  tr.timestamp_noise_std = timestamp_noise_std;
  tr.bs_tx.resize(T_s);
  tr.bs_rx.resize(T_s);
  tr.ue_tx.resize(T_s);
  tr.ue_rx.resize(T_s);
  tr.clock_error.resize(T_s);
  tr.to_bs.resize(T_s);
  tr.to_ue.resize(T_s);
  tr.h_bs.resize(cfg.rows(), T_s);
  tr.h_ue.resize(cfg.rows(), T_s);

  for (int t = 0; t < T_s; ++t) {
    const double dc = clock.mean + clock.jitter * rng.normal();
    const double d_ue = rng.uniform() * period;
    const double d_bs = rng.uniform() * period;
    const double bs_tx = t * cfg.delta_t;
    const double ue_rx = bs_tx - dc + d_ue;
    const double ue_tx = ue_rx + kTurnaround;
    const double bs_rx = ue_tx + dc + d_bs;

    tr.clock_error(t) = dc;
    tr.to_bs(t) = d_bs;
    tr.to_ue(t) = d_ue;
    tr.bs_tx(t) = bs_tx + timestamp_noise_std * rng.normal();
    tr.ue_rx(t) = ue_rx + timestamp_noise_std * rng.normal();
    tr.ue_tx(t) = ue_tx + timestamp_noise_std * rng.normal();
    tr.bs_rx(t) = bs_rx + timestamp_noise_std * rng.normal();

    const double po_bs = rng.uniform(-kPi, kPi);
    const double po_ue = rng.uniform(-kPi, kPi);
    CVec hb = std::polar(1.0, po_bs) *
              hs.cwiseProduct(steering_vector_mimo(cfg, geom, 0.0, d_bs));
    CVec hu = (reverse_scale * std::polar(1.0, po_ue)) *
              hs.cwiseProduct(steering_vector_mimo(cfg, geom, 0.0, d_ue));
    if (cfg.noise_power > 0.0) {
      for (int r = 0; r < cfg.rows(); ++r) hb(r) += rng.complex_normal(cfg.noise_power);
      for (int r = 0; r < cfg.rows(); ++r) hu(r) += rng.complex_normal(cfg.noise_power);
    }
    tr.h_bs.col(t) = hb;
    tr.h_ue.col(t) = hu;
  }
  return tr;
}

}  // namespace ascsense
