#include "ascsense/residual_compensation.hpp"

#include <cmath>

#include "ascsense/csi_io.hpp"

namespace ascsense {

double circular_mean(const RVec& delays, double period) {
  if (delays.size() == 0) throw Error(Errc::invalid_argument, "circular mean of an empty set");
  cd acc = 0.0;
  for (Eigen::Index i = 0; i < delays.size(); ++i)
    acc += std::polar(1.0, kTwoPi * delays(i) / period);
  if (std::abs(acc) == 0.0) return 0.0;
  return wrap_delay(std::arg(acc) / kTwoPi * period, period);
}

namespace {

CVec top_eigenvector(const CMat& H) {
  const EvdResult evd = hermitian_evd(H * H.adjoint());
  if (!(evd.eigenvalues(0) > 0.0)) throw Error(Errc::degenerate, "calibration stack has zero energy");
  return evd.eigenvectors.col(0);
}

}  // namespace

ReferenceStaticResponse acquire_reference(const BidirectionalTrace& trace, const SystemConfig& cfg,
                                          const CalibrationOptions& opts) {
  const int Ts = trace.size();
  if (Ts < cfg.K) throw Error(Errc::invalid_argument, "calibration trace shorter than K");
  if (trace.h_bs.rows() != cfg.rows() || trace.h_ue.rows() != cfg.rows() ||
      trace.h_bs.cols() != Ts || trace.h_ue.cols() != Ts)
    throw Error(Errc::dimension_mismatch, "calibration trace shape mismatch");
  if (!(opts.clock_search_range > 0.0))
    throw Error(Errc::invalid_argument, "clock search range must be > 0");

  const double period = cfg.alias_period();
  CsiMatrix bs{trace.h_bs, Stage::raw, 0};
  CsiMatrix ue{trace.h_ue, Stage::raw, 0};
  const AlignmentResult al_bs = align_stream(bs, cfg, opts.align);
  const AlignmentResult al_ue = align_stream(ue, cfg, opts.align);
  const CVec h_bs = top_eigenvector(al_bs.aligned.data);
  const CVec h_ue = top_eigenvector(al_ue.aligned.data);

  RVec r_bs(Ts), r_ue(Ts);
  for (int t = 0; t < Ts; ++t) {
    r_bs(t) = trace.bs_rx(t) - trace.ue_tx(t) - al_bs.relative_to(t);
    r_ue(t) = trace.ue_rx(t) - trace.bs_tx(t) - al_ue.relative_to(t);
  }
  const double m_bs = circular_mean(r_bs, period);
  const double m_ue = circular_mean(r_ue, period);

  // w_k = sum_m conj(h_ue) h_bs; objective |sum_k w_k e^{-j2pi k df x}|, x = 2C + m_ue - m_bs.
  CVec w = CVec::Zero(cfg.K);
  for (int m = 0; m < cfg.M; ++m)
    w += h_ue.segment(m * cfg.K, cfg.K).conjugate().cwiseProduct(h_bs.segment(m * cfg.K, cfg.K));

  const double step = period / opts.align.grid_size;
  const int n = 2 * static_cast<int>(std::ceil(opts.clock_search_range / step)) + 1;
  const double origin = -step * (n / 2);
  RVec J(n);
  for (int i = 0; i < n; ++i) {
    const double x = 2.0 * (origin + i * step) + m_ue - m_bs;
    const CVec a = steering_vector(cfg, x);
    J(i) = std::norm(w.cwiseProduct(a).sum());
  }
  Eigen::Index idx = 0;
  const double jmax = J.maxCoeff(&idx);
  const double jmin = J.minCoeff();
  if (!(jmax > 0.0) || (jmax - jmin) <= 1e-9 * jmax)
    throw Error(Errc::degenerate, "reciprocity objective is flat");
  double off = 0.0;
  if (idx > 0 && idx < n - 1 && J(idx - 1) > 0.0 && J(idx + 1) > 0.0) {
    const double im = 1.0 / J(idx - 1), i0 = 1.0 / J(idx), ip = 1.0 / J(idx + 1);
    if (im - 2.0 * i0 + ip > 0.0) off = parabolic_offset(im, i0, ip);
  }
  const double dc = origin + (static_cast<double>(idx) + off) * step;

  ReferenceStaticResponse ref;
  ref.h = compensate_to(h_bs, wrap_delay(-dc + m_bs, period), cfg);
  ref.h.normalize();
  ref.T_s = Ts;
  ref.timestamp_noise_std = trace.timestamp_noise_std;
  ref.clock_error_estimate = dc;
  return ref;
}

ReferenceStaticResponse alternative_reference(const CsiMatrix& aligned, double max_ratio) {
  if (aligned.stage != Stage::aligned)
    throw Error(Errc::invalid_argument, "alternative reference needs an aligned CPI");
  const EvdResult evd = hermitian_evd(aligned.data * aligned.data.adjoint());
  if (!(evd.eigenvalues(0) > 0.0)) throw Error(Errc::degenerate, "CPI has zero energy");
  if (evd.eigenvalues.size() > 1 && evd.eigenvalues(1) > max_ratio * evd.eigenvalues(0))
    throw Error(Errc::degenerate, "CPI is contaminated by dynamic paths");
  ReferenceStaticResponse ref;
  ref.h = evd.eigenvectors.col(0);
  ref.T_s = aligned.cols();
  ref.unknown_initial_to = true;
  return ref;
}

CompensatedCpi estimate_to_residual(const CsiMatrix& aligned, const ReferenceStaticResponse& ref,
                                    const SystemConfig& cfg, const SearchGrid& grid) {
  if (aligned.stage != Stage::aligned)
    throw Error(Errc::invalid_argument, "residual compensation needs an aligned CPI");
  if (ref.empty()) throw Error(Errc::invalid_argument, "reference static response missing");
  if (ref.h.size() != aligned.rows())
    throw Error(Errc::dimension_mismatch, "reference length does not match CPI rows");

  const SubspaceEstimate est = subspace_projector(aligned.data);
  // The aligned subspace is the zero-TO one rotated by diag(a(r)); testing the unshifted
  // reference against it, h^H diag(a(x)) P diag(a*(x)) h vanishes at x = -r.
  const RVec s = kernel_spectrum(ref.h, est.noise_projector(), grid, cfg.M);
  const double x = refined_argmin(s, grid).position;

  CompensatedCpi out;
  out.residual = wrap_delay(-x, cfg.alias_period());
  out.H.data = compensate_to(aligned.data, out.residual, cfg);
  out.H.stage = Stage::aligned;
  out.H.cpi_index = aligned.cpi_index;
  out.H.advance(Stage::compensated);
  out.subspace = est;
  out.subspace.signal_basis = compensate_to(est.signal_basis, out.residual, cfg);
  out.subspace.noise_basis = compensate_to(est.noise_basis, out.residual, cfg);
  return out;
}

void save_reference(const std::string& path, const ReferenceStaticResponse& ref,
                    const SystemConfig& cfg) {
  ReferenceBlob b;
  b.M = cfg.M;
  b.K = cfg.K;
  b.T_s = ref.T_s;
  b.delta_f = cfg.delta_f;
  b.timestamp_noise_std = ref.timestamp_noise_std;
  b.clock_error_estimate = ref.clock_error_estimate;
  b.flags = ref.unknown_initial_to ? 1u : 0u;
  b.h = ref.h;
  write_reference_blob(path, b);
}

ReferenceStaticResponse load_reference(const std::string& path, const SystemConfig& cfg) {
  const ReferenceBlob b = read_reference_blob(path);
  if (b.M != cfg.M || b.K != cfg.K || b.delta_f != cfg.delta_f)
    throw Error(Errc::format, path + ": reference does not match the system configuration");
  ReferenceStaticResponse ref;
  ref.h = b.h;
  ref.T_s = b.T_s;
  ref.timestamp_noise_std = b.timestamp_noise_std;
  ref.clock_error_estimate = b.clock_error_estimate;
  ref.unknown_initial_to = (b.flags & 1u) != 0;
  return ref;
}

}  // namespace ascsense
