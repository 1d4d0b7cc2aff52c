#include "ascsense/to_alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ascsense {

namespace {

constexpr double kEigenFloor = 1e-12;

}  // namespace

int mdl_dimension(const RVec& eigenvalues, int columns) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n < 2) throw Error(Errc::invalid_argument, "MDL needs at least two eigenvalues");
  if (columns < 1) throw Error(Errc::invalid_argument, "MDL needs at least one snapshot");
  const double top = eigenvalues.maxCoeff();
  if (!(top > 0.0)) throw Error(Errc::degenerate, "all eigenvalues are zero");
  // Floor keeps the geometric mean finite for exactly rank-deficient covariances.
  RVec lam = eigenvalues.cwiseMax(top * kEigenFloor);
  const double logN = std::log(static_cast<double>(columns));

  int best = 0;
  double best_f = std::numeric_limits<double>::infinity();
  for (int d = 0; d < n; ++d) {
    const int m = n - d;
    const auto tail = lam.tail(m);
    const double am = tail.mean();
    const double lgm = tail.array().log().mean();
    double f = columns * m * (std::log(am) - lgm);
    if (f < 0.0) f = 0.0;  // AM >= GM; rounding only
    f += 0.5 * d * (2.0 * n - d) * logN;
    if (f < best_f) {
      best_f = f;
      best = d;
    }
  }
  return std::clamp(best, 1, n - 1);
}

SubspaceEstimate subspace_projector(const CMat& window) {
  const int n = static_cast<int>(window.rows());
  const int cols = static_cast<int>(window.cols());
  if (n < 2 || cols < 1) throw Error(Errc::degenerate, "window too small for a subspace estimate");
  const EvdResult evd = hermitian_evd(window * window.adjoint());
  if (!(evd.eigenvalues(0) > 0.0)) throw Error(Errc::degenerate, "window has zero energy");
  const int n_eff = std::min(n, cols);
  SubspaceEstimate est;
  est.eigenvalues = evd.eigenvalues;
  est.dimension = n_eff >= 2 ? mdl_dimension(evd.eigenvalues.head(n_eff), cols) : 1;
  const int d = est.dimension;
  est.signal_basis = evd.eigenvectors.leftCols(d);
  est.noise_basis = evd.eigenvectors.rightCols(n - d);
  const int trailing = n_eff - d;
  est.noise_power =
      trailing > 0 ? std::max(0.0, evd.eigenvalues.segment(d, trailing).mean()) / cols : 0.0;
  return est;
}

CovarianceFactor covariance_factor(const CMat& window) {
  const int n = static_cast<int>(window.rows());
  const int cols = static_cast<int>(window.cols());
  if (n < 1 || cols < 1) throw Error(Errc::degenerate, "empty window");
  const EvdResult evd = hermitian_evd(window * window.adjoint());
  const double top = evd.eigenvalues(0);
  if (!(top > 0.0)) throw Error(Errc::degenerate, "window has zero energy");
  const int n_eff = std::min(n, cols);
  double s2 = 0.0;
  if (n_eff >= 2) {
    const int d = mdl_dimension(evd.eigenvalues.head(n_eff), cols);
    s2 = std::max(0.0, evd.eigenvalues.segment(d, n_eff - d).mean()) / cols;
  }
  s2 = std::max(s2, top * kEigenFloor / cols);
  CovarianceFactor out;
  out.noise_power = s2;
  RVec w(n);
  for (int i = 0; i < n; ++i) {
    const double v = std::max(0.0, evd.eigenvalues(i)) / cols + s2;
    if (!(v > 0.0)) throw Error(Errc::degenerate, "adjusted covariance is not positive definite");
    w(i) = 1.0 / std::sqrt(v);
  }
  out.factor = evd.eigenvectors * w.asDiagonal();
  out.kernel = out.factor * out.factor.adjoint();
  return out;
}

namespace {

ToEstimate minimize(const CMat& snapshots, const CMat& kernel, const SearchGrid& grid,
                    int blocks) {
  ToEstimate out;
  if (!(snapshots.squaredNorm() > 0.0)) {
    out.degenerate = true;
    return out;
  }
  const RVec s = kernel_spectrum(snapshots, kernel, grid, blocks);
  const Extremum e = refined_argmin(s, grid);
  out.delay = e.position;
  out.objective = e.value;
  return out;
}

}  // namespace

ToEstimate estimate_relative_to_subspace(const CMat& snapshots, const SubspaceEstimate& est,
                                         const SearchGrid& grid, int blocks) {
  if (est.noise_basis.rows() != snapshots.rows())
    throw Error(Errc::dimension_mismatch, "subspace estimate does not match snapshot length");
  return minimize(snapshots, est.noise_projector(), grid, blocks);
}

ToEstimate estimate_relative_to_covariance(const CMat& snapshots, const CovarianceFactor& cov,
                                           const SearchGrid& grid, int blocks) {
  if (cov.kernel.rows() != snapshots.rows())
    throw Error(Errc::dimension_mismatch, "covariance factor does not match snapshot length");
  return minimize(snapshots, cov.kernel, grid, blocks);
}

int hankel_subarray_size(int K, int t) {
  if (K < 2) throw Error(Errc::invalid_argument, "initial alignment needs K >= 2");
  if (t < 2) throw Error(Errc::invalid_argument, "Hankel procedure starts at snapshot 2");
  return static_cast<int>((static_cast<long long>(K + 1) * (t - 1)) / t);
}

CMat hankel_smooth(const CMat& X, int K, int M, int s) {
  if (X.rows() != static_cast<Eigen::Index>(K) * M)
    throw Error(Errc::dimension_mismatch, "Hankel input rows must equal M*K");
  if (s < 1 || s > K) throw Error(Errc::invalid_argument, "subarray size out of range");
  const int subs = K - s + 1;
  CMat out(static_cast<Eigen::Index>(M) * s, static_cast<Eigen::Index>(subs) * X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    for (int k = 0; k < subs; ++k)
      for (int m = 0; m < M; ++m)
        out.col(c * subs + k).segment(m * s, s) = X.col(c).segment(m * K + k, s);
  return out;
}

CVec compensate_to(const CVec& h, double tau, const SystemConfig& cfg) {
  if (h.size() != cfg.rows()) throw Error(Errc::dimension_mismatch, "snapshot length must be M*K");
  const CVec a = steering_vector(cfg, tau).conjugate();
  CVec out(h.size());
  for (int m = 0; m < cfg.M; ++m)
    out.segment(m * cfg.K, cfg.K) = h.segment(m * cfg.K, cfg.K).cwiseProduct(a);
  return out;
}

CMat compensate_to(const CMat& H, double tau, const SystemConfig& cfg) {
  if (H.rows() != cfg.rows()) throw Error(Errc::dimension_mismatch, "snapshot length must be M*K");
  const CVec a = steering_vector(cfg, tau).conjugate();
  CMat out(H.rows(), H.cols());
  for (int m = 0; m < cfg.M; ++m)
    out.middleRows(m * cfg.K, cfg.K) = a.asDiagonal() * H.middleRows(m * cfg.K, cfg.K);
  return out;
}

AlignmentState::AlignmentState(const SystemConfig& cfg, const AlignmentOptions& opts)
    : cfg_(cfg), opts_(opts), grid_(SearchGrid::for_system(cfg, opts.grid_size)) {
  if (opts.window < 2) throw Error(Errc::invalid_argument, "alignment window must be >= 2");
}

CMat AlignmentState::window() const {
  CMat W(cfg_.rows(), static_cast<Eigen::Index>(window_.size()));
  for (std::size_t i = 0; i < window_.size(); ++i) W.col(static_cast<Eigen::Index>(i)) = window_[i];
  return W;
}

ToEstimate AlignmentState::estimate(const CMat& window, const CMat& snapshots, int blocks) const {
  ToEstimate fallback;
  fallback.degenerate = true;
  if (!(window.squaredNorm() > 0.0) || window.rows() < 2) return fallback;
  if (opts_.method == AlignMethod::subspace)
    return estimate_relative_to_subspace(snapshots, subspace_projector(window), grid_, blocks);
  return estimate_relative_to_covariance(snapshots, covariance_factor(window), grid_, blocks);
}

CVec AlignmentState::align_snapshot(const CVec& h) {
  if (h.size() != cfg_.rows()) throw Error(Errc::dimension_mismatch, "snapshot length must be M*K");
  const int t = processed_ + 1;
  ToEstimate est;
  if (t == 1) {
    est.delay = 0.0;
  } else if (t <= cfg_.K) {
    const int s = hankel_subarray_size(cfg_.K, t);
    const CMat W = window();
    est = estimate(hankel_smooth(W, cfg_.K, cfg_.M, s), hankel_smooth(h, cfg_.K, cfg_.M, s),
                   cfg_.M);
  } else {
    est = estimate(window(), h, cfg_.M);
  }
  if (t > 1 && !(h.squaredNorm() > 0.0)) est.degenerate = true;

  last_degenerate_ = est.degenerate;
  if (est.degenerate) {
    ++degenerate_count_;
    est.delay = 0.0;
  }
  CVec aligned = est.delay == 0.0 ? h : compensate_to(h, est.delay, cfg_);
  relative_to_.push_back(est.delay);
  window_.push_back(aligned);
  if (static_cast<int>(window_.size()) > opts_.window) window_.pop_front();
  ++processed_;
  return aligned;
}

AlignmentResult align_stream(const CsiMatrix& raw, const SystemConfig& cfg,
                             const AlignmentOptions& opts) {
  if (raw.stage != Stage::raw) throw Error(Errc::invalid_argument, "alignment expects a raw CPI");
  AlignmentState state(cfg, opts);
  AlignmentResult out;
  out.aligned.data.resize(raw.rows(), raw.cols());
  out.aligned.cpi_index = raw.cpi_index;
  for (int t = 0; t < raw.cols(); ++t) out.aligned.data.col(t) = state.align_snapshot(raw.data.col(t));
  out.aligned.stage = Stage::aligned;
  out.relative_to = Eigen::Map<const RVec>(state.relative_to().data(),
                                           static_cast<Eigen::Index>(state.relative_to().size()));
  out.degenerate_count = state.degenerate_count();
  return out;
}

CMat initial_align(const CMat& snapshots, const SystemConfig& cfg, const AlignmentOptions& opts) {
  AlignmentState state(cfg, opts);
  const int n = std::min<int>(opts.window, static_cast<int>(snapshots.cols()));
  CMat out(snapshots.rows(), n);
  for (int t = 0; t < n; ++t) out.col(t) = state.align_snapshot(snapshots.col(t));
  return out;
}

}  // namespace ascsense
