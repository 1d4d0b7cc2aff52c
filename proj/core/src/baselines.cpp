#include "ascsense/baselines.hpp"

#include <cmath>
#include <vector>

namespace ascsense {

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::similarity: return "simil";
    case BaselineKind::envelope: return "evlp";
    case BaselineKind::ifft_peak: return "ifft";
  }
  return "?";
}

namespace {

void check_input(const CsiMatrix& raw, const SystemConfig& cfg, int grid_size) {
  if (raw.stage != Stage::raw) throw Error(Errc::invalid_argument, "alignment expects a raw CPI");
  if (raw.rows() != cfg.rows()) throw Error(Errc::dimension_mismatch, "CPI rows must equal M*K");
  SearchGrid::for_system(cfg, grid_size).validate(cfg.K);
}

// IDFT (e^{+j}) of each antenna block, zero-padded to N: column m holds block m.
CMat block_idft(const CVec& h, const SystemConfig& cfg, int N) {
  CMat out(N, cfg.M);
  for (int m = 0; m < cfg.M; ++m)
    out.col(m) = zero_padded_fft(h.segment(m * cfg.K, cfg.K).conjugate(), N).conjugate();
  return out;
}

RVec power_profile(const CVec& h, const SystemConfig& cfg, int N) {
  return block_idft(h, cfg, N).rowwise().squaredNorm();
}

// sum_k w_k e^{+j 2 pi k df tau}
cd modulated_sum(const CVec& w, double delta_f, double tau) {
  cd acc = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    acc += w(k) * std::polar(1.0, kTwoPi * static_cast<double>(k) * delta_f * tau);
  return acc;
}

AlignmentResult finish(const CsiMatrix& raw, CMat aligned, const std::vector<double>& delays,
                       int degenerate) {
  AlignmentResult out;
  out.aligned.data = std::move(aligned);
  out.aligned.cpi_index = raw.cpi_index;
  out.aligned.stage = Stage::aligned;
  out.relative_to = Eigen::Map<const RVec>(delays.data(), static_cast<Eigen::Index>(delays.size()));
  out.degenerate_count = degenerate;
  return out;
}

}  // namespace

AlignmentResult align_similarity(const CsiMatrix& raw, const SystemConfig& cfg, int grid_size) {
  check_input(raw, cfg, grid_size);
  const SearchGrid grid = SearchGrid::for_system(cfg, grid_size);
  const int T = raw.cols();
  CMat aligned(raw.rows(), T);
  std::vector<double> delays(T, 0.0);
  int degenerate = 0;
  for (int t = 0; t < T; ++t) {
    const CVec h = raw.data.col(t);
    if (t == 0) {
      aligned.col(0) = h;
      continue;
    }
    const CVec prev = aligned.col(t - 1);
    CVec w = CVec::Zero(cfg.K);
    for (int m = 0; m < cfg.M; ++m)
      w += prev.segment(m * cfg.K, cfg.K).conjugate().cwiseProduct(h.segment(m * cfg.K, cfg.K));
    if (!(w.squaredNorm() > 0.0)) {
      ++degenerate;
      aligned.col(t) = h;
      continue;
    }
    const RVec s = zero_padded_fft(w.conjugate(), grid.size).cwiseAbs2();
    const double tau = wrap_delay(refined_argmax(s, grid).position, cfg.alias_period());
    const cd c = modulated_sum(w, cfg.delta_f, tau);
    delays[t] = tau;
    aligned.col(t) = compensate_to(h, tau, cfg) * std::polar(1.0, -std::arg(c));
  }
  return finish(raw, std::move(aligned), delays, degenerate);
}

AlignmentResult align_envelope(const CsiMatrix& raw, const SystemConfig& cfg, int grid_size) {
  check_input(raw, cfg, grid_size);
  const SearchGrid grid = SearchGrid::for_system(cfg, grid_size);
  const int N = grid.size;
  const int T = raw.cols();
  CMat aligned(raw.rows(), T);
  std::vector<double> delays(T, 0.0);
  int degenerate = 0;
  RVec ref;
  int ref_count = 0;
  for (int t = 0; t < T; ++t) {
    const CVec h = raw.data.col(t);
    const RVec env = power_profile(h, cfg, N).cwiseSqrt();
    double tau = 0.0;
    if (t > 0) {
      if (!(env.sum() > 0.0) || !(ref.sum() > 0.0)) {
        ++degenerate;
      } else {
        const CVec E = zero_padded_fft(env.cast<cd>(), N);
        const CVec R = zero_padded_fft(ref.cast<cd>(), N);
        const CVec prod = E.cwiseProduct(R.conjugate());
        const RVec xc = zero_padded_fft(prod.conjugate(), N).conjugate().real() / N;
        tau = wrap_delay(refined_argmax(xc, grid).position, cfg.alias_period());
      }
    }
    delays[t] = tau;
    aligned.col(t) = tau == 0.0 ? h : compensate_to(h, tau, cfg);
    const RVec env_aligned = tau == 0.0 ? env : RVec(power_profile(aligned.col(t), cfg, N).cwiseSqrt());
    if (ref_count == 0) {
      ref = env_aligned;
    } else {
      ref = (ref * ref_count + env_aligned) / (ref_count + 1);
    }
    ++ref_count;
  }
  return finish(raw, std::move(aligned), delays, degenerate);
}

AlignmentResult align_ifft_peak(const CsiMatrix& raw, const SystemConfig& cfg, int grid_size) {
  check_input(raw, cfg, grid_size);
  const SearchGrid grid = SearchGrid::for_system(cfg, grid_size);
  const double period = cfg.alias_period();
  const int T = raw.cols();
  CMat aligned(raw.rows(), T);
  std::vector<double> delays(T, 0.0);
  int degenerate = 0;
  double ref_peak = 0.0;
  cd ref_value = 0.0;
  bool have_ref = false;

  auto coherent = [&](const CVec& h, double tau) {
    cd acc = 0.0;
    for (int m = 0; m < cfg.M; ++m)
      acc += modulated_sum(h.segment(m * cfg.K, cfg.K), cfg.delta_f, tau);
    return acc;
  };

  for (int t = 0; t < T; ++t) {
    const CVec h = raw.data.col(t);
    const RVec p = power_profile(h, cfg, grid.size);
    if (!(p.maxCoeff() > 0.0)) {
      if (t > 0) ++degenerate;
      aligned.col(t) = h;
      continue;
    }
    const double peak = refined_argmax(p, grid).position;
    if (!have_ref) {
      ref_peak = peak;
      ref_value = coherent(h, peak);
      have_ref = true;
      aligned.col(t) = h;
      continue;
    }
    const double tau = wrap_delay(peak - ref_peak, period);
    CVec a = compensate_to(h, tau, cfg);
    const cd v = coherent(a, ref_peak);
    if (std::abs(v) > 0.0 && std::abs(ref_value) > 0.0)
      a *= std::polar(1.0, -(std::arg(v) - std::arg(ref_value)));
    delays[t] = tau;
    aligned.col(t) = a;
  }
  return finish(raw, std::move(aligned), delays, degenerate);
}

AlignmentResult align_baseline(BaselineKind kind, const CsiMatrix& raw, const SystemConfig& cfg,
                               int grid_size) {
  switch (kind) {
    case BaselineKind::similarity: return align_similarity(raw, cfg, grid_size);
    case BaselineKind::envelope: return align_envelope(raw, cfg, grid_size);
    case BaselineKind::ifft_peak: return align_ifft_peak(raw, cfg, grid_size);
  }
  throw Error(Errc::invalid_argument, "unknown baseline");
}

}  // namespace ascsense
