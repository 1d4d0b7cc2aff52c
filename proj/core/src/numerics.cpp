#include "ascsense/numerics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "ascsense/signal_model.hpp"

namespace ascsense {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

SearchGrid SearchGrid::for_system(const SystemConfig& cfg, int size, double origin) {
  SearchGrid g;
  g.size = size;
  g.step = cfg.alias_period() / size;
  g.origin = origin;
  g.validate(cfg.K);
  return g;
}

void SearchGrid::validate(int K) const {
  if (!is_power_of_two(size)) throw Error(Errc::invalid_argument, "grid size must be a power of two");
  if (size < 8 * K) throw Error(Errc::invalid_argument, "grid size must be at least 8K");
  if (!(step > 0.0)) throw Error(Errc::invalid_argument, "grid step must be > 0");
}

EvdResult hermitian_evd(const CMat& R) {
  if (R.rows() != R.cols()) throw Error(Errc::dimension_mismatch, "EVD needs a square matrix");
  if (!R.allFinite()) throw Error(Errc::invalid_argument, "EVD input has non-finite entries");
  const CMat S = (R + R.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMat> es(S);
  if (es.info() != Eigen::Success) throw Error(Errc::degenerate, "EVD did not converge");
  EvdResult out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

PinvResult pseudo_inverse(const CMat& A, double rcond) {
  if (!A.allFinite()) throw Error(Errc::invalid_argument, "pseudo-inverse input has non-finite entries");
  Eigen::JacobiSVD<CMat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  PinvResult out;
  const Eigen::Index p = s.size();
  const double smax = p ? s(0) : 0.0;
  RVec inv = RVec::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (s(i) > rcond * smax && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
      ++out.rank;
    }
  }
  out.condition = (p && s(p - 1) > 0.0) ? smax / s(p - 1) : std::numeric_limits<double>::infinity();
  out.rank_deficient = out.rank < p;
  out.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
  return out;
}

CMat orthonormal_nullspace(const CMat& A) {
  const Eigen::Index m = A.rows(), n = A.cols();
  if (m <= n) throw Error(Errc::dimension_mismatch, "nullspace needs more rows than columns");
  Eigen::ColPivHouseholderQR<CMat> qr(A);
  if (qr.rank() < n) throw Error(Errc::rank_deficient, "nullspace input is rank deficient");
  const CMat Q = qr.householderQ() * CMat::Identity(m, m);
  return Q.rightCols(m - n);
}

namespace {

struct FftwBuffer {
  fftw_complex* ptr = nullptr;
  int n = 0;
  ~FftwBuffer() {
    if (ptr) fftw_free(ptr);
  }
  fftw_complex* get(int size) {
    if (size > n) {
      if (ptr) fftw_free(ptr);
      ptr = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size));
      n = size;
    }
    return ptr;
  }
};

// Planner calls are not thread safe; execution of an existing plan on new arrays is.
fftw_plan forward_plan(int N) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(N);
  if (it != plans.end()) return it->second;
  auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * N));
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * N));
  fftw_plan p = fftw_plan_dft_1d(N, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(N, p);
  return p;
}

thread_local FftwBuffer tl_in;
thread_local FftwBuffer tl_out;

// Transforms `in` (length N, already filled) into `out` via the cached plan.
void run_fft(int N, fftw_complex* in, fftw_complex* out) {
  fftw_execute_dft(forward_plan(N), in, out);
}

inline cd as_cd(const fftw_complex& v) { return {v[0], v[1]}; }

double grid_delta_f(const SearchGrid& g) { return 1.0 / (g.size * g.step); }

}  // namespace

CVec zero_padded_fft(const CVec& x, int N) {
  if (x.size() > N) throw Error(Errc::invalid_argument, "FFT length shorter than input");
  fftw_complex* in = tl_in.get(N);
  fftw_complex* out = tl_out.get(N);
  std::memset(in, 0, sizeof(fftw_complex) * N);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    in[k][0] = x(k).real();
    in[k][1] = x(k).imag();
  }
  run_fft(N, in, out);
  CVec y(N);
  for (int n = 0; n < N; ++n) y(n) = as_cd(out[n]);
  return y;
}

RVec fft_spectrum(const CVec& h, const CMat& F, const SearchGrid& grid, int blocks) {
  if (!is_power_of_two(grid.size)) throw Error(Errc::invalid_argument, "grid size must be a power of two");
  if (blocks < 1 || h.size() % blocks != 0)
    throw Error(Errc::dimension_mismatch, "snapshot length not divisible by block count");
  if (F.rows() != h.size()) throw Error(Errc::dimension_mismatch, "factor rows must equal snapshot length");
  const int N = grid.size;
  const int K = static_cast<int>(h.size()) / blocks;
  if (K > N) throw Error(Errc::invalid_argument, "grid smaller than subcarrier count");
  const double df = grid_delta_f(grid);

  CVec origin_mod(K);
  for (int k = 0; k < K; ++k) origin_mod(k) = std::polar(1.0, -kTwoPi * k * df * grid.origin);

  RVec out = RVec::Zero(N);
  fftw_complex* in = tl_in.get(N);
  fftw_complex* res = tl_out.get(N);
  for (Eigen::Index c = 0; c < F.cols(); ++c) {
    std::memset(in, 0, sizeof(fftw_complex) * N);
    for (int k = 0; k < K; ++k) {
      cd y = 0.0;
      for (int m = 0; m < blocks; ++m) y += std::conj(h(m * K + k)) * F(m * K + k, c);
      y *= origin_mod(k);
      in[k][0] = y.real();
      in[k][1] = y.imag();
    }
    run_fft(N, in, res);
    for (int n = 0; n < N; ++n) out(n) += res[n][0] * res[n][0] + res[n][1] * res[n][1];
  }
  return out;
}

namespace {

// Transforms lag coefficients c[d], d in (-K, K), into S[n] = Re sum_d c[d] e^{-j2pi d n/N}.
RVec lag_transform(const CVec& lags, int K, const SearchGrid& grid) {
  const int N = grid.size;
  if (2 * K - 1 > N) throw Error(Errc::invalid_argument, "grid too small for lag transform");
  const double df = grid_delta_f(grid);
  fftw_complex* in = tl_in.get(N);
  fftw_complex* out = tl_out.get(N);
  std::memset(in, 0, sizeof(fftw_complex) * N);
  for (int d = -(K - 1); d <= K - 1; ++d) {
    cd v = lags(d + K - 1);
    if (grid.origin != 0.0) v *= std::polar(1.0, -kTwoPi * d * df * grid.origin);
    const int idx = d >= 0 ? d : N + d;
    in[idx][0] = v.real();
    in[idx][1] = v.imag();
  }
  run_fft(N, in, out);
  RVec s(N);
  for (int n = 0; n < N; ++n) s(n) = out[n][0];
  return s;
}

}  // namespace

RVec kernel_spectrum(const CMat& H, const CMat& P, const SearchGrid& grid, int blocks) {
  if (!is_power_of_two(grid.size)) throw Error(Errc::invalid_argument, "grid size must be a power of two");
  const Eigen::Index n = H.rows();
  if (P.rows() != n || P.cols() != n) throw Error(Errc::dimension_mismatch, "kernel size mismatch");
  if (blocks < 1 || n % blocks != 0)
    throw Error(Errc::dimension_mismatch, "snapshot length not divisible by block count");
  const int K = static_cast<int>(n) / blocks;
  // C(a, b) = sum_j conj(h_ja) h_jb
  const CMat C = H.conjugate() * H.transpose();
  CVec lags = CVec::Zero(2 * K - 1);
  for (int m = 0; m < blocks; ++m)
    for (int mp = 0; mp < blocks; ++mp)
      for (int k = 0; k < K; ++k) {
        const Eigen::Index a = m * K + k;
        for (int l = 0; l < K; ++l) {
          const Eigen::Index b = mp * K + l;
          lags(k - l + K - 1) += C(a, b) * P(a, b);
        }
      }
  return lag_transform(lags, K, grid);
}

RVec steering_quadratic_spectrum(const CMat& P, const CVec& spatial, const SearchGrid& grid) {
  const Eigen::Index n = P.rows();
  const int blocks = static_cast<int>(spatial.size());
  if (P.cols() != n || blocks < 1 || n % blocks != 0)
    throw Error(Errc::dimension_mismatch, "kernel/spatial size mismatch");
  const int K = static_cast<int>(n) / blocks;
  CVec lags = CVec::Zero(2 * K - 1);
  for (int m = 0; m < blocks; ++m)
    for (int mp = 0; mp < blocks; ++mp) {
      const cd w = std::conj(spatial(m)) * spatial(mp);
      for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) lags(l - k + K - 1) += w * P(m * K + k, mp * K + l);
    }
  return lag_transform(lags, K, grid);
}

double parabolic_offset(double ym, double y0, double yp) {
  const double den = ym - 2.0 * y0 + yp;
  if (den == 0.0 || !std::isfinite(den)) return 0.0;
  const double d = 0.5 * (ym - yp) / den;
  if (!std::isfinite(d)) return 0.0;
  return std::clamp(d, -0.5, 0.5);
}

namespace {

Extremum finish(const SearchGrid& grid, int idx, double offset, double value) {
  Extremum e;
  e.index = idx;
  e.value = value;
  e.position = grid.origin + wrap_delay((idx + offset) * grid.step, grid.period());
  return e;
}

}  // namespace

Extremum refined_argmin(const RVec& s, const SearchGrid& grid) {
  const int N = static_cast<int>(s.size());
  if (N != grid.size) throw Error(Errc::dimension_mismatch, "spectrum/grid size mismatch");
  Eigen::Index idx = 0;
  s.minCoeff(&idx);
  const int i = static_cast<int>(idx);
  const double ym = s((i - 1 + N) % N), y0 = s(i), yp = s((i + 1) % N);
  double off = 0.0;
  if (ym - 2.0 * y0 + yp > 0.0) off = parabolic_offset(ym, y0, yp);
  return finish(grid, i, off, y0);
}

Extremum refined_argmax(const RVec& s, const SearchGrid& grid) {
  const int N = static_cast<int>(s.size());
  if (N != grid.size) throw Error(Errc::dimension_mismatch, "spectrum/grid size mismatch");
  Eigen::Index idx = 0;
  s.maxCoeff(&idx);
  const int i = static_cast<int>(idx);
  const double ym = s((i - 1 + N) % N), y0 = s(i), yp = s((i + 1) % N);
  double off = 0.0;
  if (ym > 0.0 && y0 > 0.0 && yp > 0.0) {
    const double im = 1.0 / ym, i0 = 1.0 / y0, ip = 1.0 / yp;
    if (im - 2.0 * i0 + ip > 0.0) off = parabolic_offset(im, i0, ip);
  } else if (ym - 2.0 * y0 + yp < 0.0) {
    off = parabolic_offset(ym, y0, yp);
  }
  return finish(grid, i, off, y0);
}

}  // namespace ascsense
