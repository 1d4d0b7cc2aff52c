#include "ascsense/param_estimation.hpp"

#include <algorithm>
#include <cmath>

namespace ascsense {

RVec angle_grid(double lo_deg, double hi_deg, double step_deg) {
  if (!(step_deg > 0.0) || hi_deg < lo_deg)
    throw Error(Errc::invalid_argument, "invalid angle grid");
  const int n = static_cast<int>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
  RVec out(n);
  for (int i = 0; i < n; ++i) out(i) = (lo_deg + i * step_deg) * kPi / 180.0;
  return out;
}

namespace {

Spectrum music_impl(const SubspaceEstimate& est, const CVec* ref, const SystemConfig& cfg,
                    const ArrayGeometry& geom, const SearchGrid& grid, const RVec& angles_in) {
  const int n = cfg.rows();
  if (est.noise_basis.rows() != n) throw Error(Errc::dimension_mismatch, "subspace/CPI size mismatch");
  if (geom.size() != cfg.M) throw Error(Errc::dimension_mismatch, "array size does not match cfg.M");
  grid.validate(cfg.K);
  const RVec angles = angles_in.size() ? angles_in : RVec::Zero(1);
  const double eps = 1e-12 * n;
  const CMat P = est.noise_projector();

  Spectrum out;
  out.grid = grid;
  out.angles = angles;
  out.values.resize(angles.size(), grid.size);

  CVec h;
  double h2 = 0.0;
  if (ref) {
    h = *ref;
    h2 = h.squaredNorm();
    if (!(h2 > 0.0)) throw Error(Errc::degenerate, "reference response has zero energy");
  }
  const double df = 1.0 / (grid.size * grid.step);
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    const CVec spatial = geom.response(angles(i));
    const RVec den = steering_quadratic_spectrum(P, spatial, grid);
    RVec num = RVec::Constant(grid.size, static_cast<double>(n));
    if (ref) {
      CVec y = CVec::Zero(cfg.K);
      for (int m = 0; m < cfg.M; ++m)
        y += spatial(m) * h.segment(m * cfg.K, cfg.K).conjugate();
      if (grid.origin != 0.0)
        for (int k = 0; k < cfg.K; ++k) y(k) *= std::polar(1.0, -kTwoPi * k * df * grid.origin);
      const CVec f = zero_padded_fft(y, grid.size);
      for (int j = 0; j < grid.size; ++j) num(j) = std::max(0.0, n - std::norm(f(j)) / h2);
    }
    for (int j = 0; j < grid.size; ++j)
      out.values(i, j) = num(j) / (std::max(0.0, den(j)) + eps);
  }
  return out;
}

}  // namespace

Spectrum modified_music_spectrum(const SubspaceEstimate& est, const ReferenceStaticResponse& ref,
                                 const SystemConfig& cfg, const ArrayGeometry& geom,
                                 const SearchGrid& grid, const RVec& angles) {
  if (ref.empty()) throw Error(Errc::invalid_argument, "reference static response missing");
  if (ref.h.size() != cfg.rows()) throw Error(Errc::dimension_mismatch, "reference length mismatch");
  return music_impl(est, &ref.h, cfg, geom, grid, angles);
}

Spectrum modified_music_spectrum(const CompensatedCpi& cpi, const ReferenceStaticResponse& ref,
                                 const SystemConfig& cfg, const ArrayGeometry& geom,
                                 const SearchGrid& grid, const RVec& angles) {
  if (cpi.H.stage != Stage::compensated)
    throw Error(Errc::invalid_argument, "modified MUSIC needs a compensated CPI");
  return modified_music_spectrum(cpi.subspace, ref, cfg, geom, grid, angles);
}

Spectrum music_spectrum(const SubspaceEstimate& est, const SystemConfig& cfg,
                        const ArrayGeometry& geom, const SearchGrid& grid, const RVec& angles) {
  return music_impl(est, nullptr, cfg, geom, grid, angles);
}

namespace {

double inverse_parabola(double ym, double y0, double yp) {
  if (!(ym > 0.0 && y0 > 0.0 && yp > 0.0)) return 0.0;
  const double im = 1.0 / ym, i0 = 1.0 / y0, ip = 1.0 / yp;
  if (!(im - 2.0 * i0 + ip > 0.0)) return 0.0;
  return parabolic_offset(im, i0, ip);
}

}  // namespace

PeakList pick_peaks(const Spectrum& spec, int L_d, int min_separation) {
  if (L_d < 1) throw Error(Errc::invalid_argument, "L_d must be >= 1");
  const RMat& S = spec.values;
  const int A = static_cast<int>(S.rows());
  const int N = static_cast<int>(S.cols());

  struct Cand {
    int i, n;
    double v;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < A; ++i)
    for (int n = 0; n < N; ++n) {
      const double v = S(i, n);
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        const int ii = i + di;
        if (ii < 0 || ii >= A) continue;
        for (int dn = -1; dn <= 1; ++dn) {
          if (di == 0 && dn == 0) continue;
          if (S(ii, (n + dn + N) % N) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) cands.push_back({i, n, v});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.v > b.v; });

  PeakList out;
  std::vector<Cand> chosen;
  for (const auto& c : cands) {
    if (static_cast<int>(chosen.size()) == L_d) break;
    bool ok = true;
    for (const auto& p : chosen) {
      const int dn = std::abs(c.n - p.n);
      const int dcirc = std::min(dn, N - dn);
      const int da = std::abs(c.i - p.i);
      if (dcirc < min_separation && da < min_separation) {
        ok = false;
        break;
      }
    }
    if (ok) chosen.push_back(c);
  }
  out.shortfall = static_cast<int>(chosen.size()) < L_d;

  for (const auto& c : chosen) {
    Peak p;
    p.angle_index = c.i;
    p.delay_index = c.n;
    p.height = c.v;
    const double off_n = inverse_parabola(S(c.i, (c.n - 1 + N) % N), c.v, S(c.i, (c.n + 1) % N));
    p.delay = spec.grid.origin + wrap_delay((c.n + off_n) * spec.grid.step, spec.grid.period());
    p.aoa = spec.angles(c.i);
    if (c.i > 0 && c.i < A - 1) {
      const double off_a = inverse_parabola(S(c.i - 1, c.n), c.v, S(c.i + 1, c.n));
      const double step = off_a >= 0 ? spec.angles(c.i + 1) - spec.angles(c.i)
                                     : spec.angles(c.i) - spec.angles(c.i - 1);
      p.aoa += off_a * step;
    }
    out.peaks.push_back(p);
  }
  return out;
}

TargetEstimates estimate_cgs(const CsiMatrix& H_C, const PeakList& peaks,
                             const SystemConfig& cfg, const ArrayGeometry& geom) {
  const int n = cfg.rows();
  if (H_C.rows() != n) throw Error(Errc::dimension_mismatch, "CPI rows must equal M*K");
  const int L = static_cast<int>(peaks.peaks.size());
  const int T = H_C.cols();
  TargetEstimates out;
  out.cgs = CMat::Zero(L, T);
  out.po = RVec::Zero(T);
  if (L == 0) return out;
  if (L >= n) throw Error(Errc::rank_deficient, "more targets than observation rows");

  CMat Ad(n, L);
  for (int l = 0; l < L; ++l) {
    const auto& p = peaks.peaks[l];
    Ad.col(l) = steering_vector_mimo(cfg, geom, p.aoa, p.delay);
    out.delays.push_back(p.delay);
    out.aoas.push_back(p.aoa);
  }
  const PinvResult pinv = pseudo_inverse(Ad);
  out.condition = pinv.condition;
  out.rank_deficient = pinv.rank_deficient;
  out.ill_conditioned = !(pinv.condition <= 1e6);

  CMat Q;
  if (!pinv.rank_deficient) {
    Q = orthonormal_nullspace(Ad);
  } else {
    Eigen::JacobiSVD<CMat> svd(Ad, Eigen::ComputeFullU);
    Q = svd.matrixU().rightCols(n - pinv.rank);
  }

  const CMat sep = pinv.pinv * H_C.data;
  const CMat proj = Q.adjoint() * H_C.data;
  Eigen::JacobiSVD<CMat> svd(proj, Eigen::ComputeThinV);
  const double s1 = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  if (!(s1 > 1e-12 * std::max(1.0, H_C.data.norm()))) {
    out.no_static_energy = true;
  } else {
    const CVec v = svd.matrixV().col(0);
    const double anchor = std::arg(std::conj(v(0)));
    for (int t = 0; t < T; ++t) out.po(t) = wrap_phase(std::arg(std::conj(v(t))) - anchor);
  }
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < T; ++t) out.cgs(l, t) = std::polar(1.0, -out.po(t)) * sep(l, t);
  return out;
}

double doppler_readout(const CVec& cgs, const SystemConfig& cfg) {
  const int T = static_cast<int>(cgs.size());
  if (T < 8) throw Error(Errc::invalid_argument, "Doppler readout needs at least 8 samples");
  int N = 1;
  while (N < 8 * T) N <<= 1;
  const CVec f = zero_padded_fft(cgs, N);
  Eigen::Index idx = 0;
  f.cwiseAbs2().maxCoeff(&idx);
  const int bin = idx < N / 2 ? static_cast<int>(idx) : static_cast<int>(idx) - N;
  // e^{-j} kernel: a tone e^{j 2 pi nu t dt} peaks at bin nu N dt.
  const double nu = bin / (N * cfg.delta_t);
  return nu * cfg.wavelength();
}

RotationTranslation align_rotation_translation(const CVec& estimate, const CVec& truth) {
  if (estimate.size() != truth.size() || truth.size() == 0)
    throw Error(Errc::dimension_mismatch, "alignment needs equal, non-empty sequences");
  const cd me = estimate.mean();
  const cd mt = truth.mean();
  const CVec ec = estimate.array() - me;
  const CVec tc = truth.array() - mt;
  const cd inner = ec.dot(tc);  // sum conj(ec) tc
  RotationTranslation out;
  out.rotation = std::abs(inner) > 0.0 ? inner / std::abs(inner) : cd{1.0, 0.0};
  out.translation = mt - out.rotation * me;
  out.aligned = (out.rotation * estimate).array() + out.translation;
  return out;
}

}  // namespace ascsense
