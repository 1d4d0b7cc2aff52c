#pragma once

#include <deque>
#include <vector>

#include "ascsense/numerics.hpp"
#include "ascsense/signal_model.hpp"

namespace ascsense {

enum class AlignMethod { subspace, covariance };

struct SubspaceEstimate {
  int dimension = 0;   // d
  CMat signal_basis;   // [n x d]
  CMat noise_basis;    // [n x (n - d)]
  RVec eigenvalues;    // descending
  double noise_power = 0.0;

  CMat noise_projector() const { return noise_basis * noise_basis.adjoint(); }
};

/// MDL order estimate over descending eigenvalues from `columns` snapshots, clamped to [1, n-1].
int mdl_dimension(const RVec& eigenvalues, int columns);

/// EVD of window * window^H followed by MDL. When the window has fewer columns than rows only
/// the leading `columns` eigenvalues enter the order selection.
SubspaceEstimate subspace_projector(const CMat& window);

struct CovarianceFactor {
  CMat factor;  // F with F F^H = (R_w / T_w + s2 I)^-1
  CMat kernel;  // F F^H
  double noise_power = 0.0;
};

CovarianceFactor covariance_factor(const CMat& window);

struct ToEstimate {
  double delay = 0.0;      // s, in [0, 1/delta_f)
  double objective = 0.0;  // objective at the grid minimum
  bool degenerate = false;
};

/// Minimizes sum_j h_j^H diag(a(d)) P_n diag(a*(d)) h_j over the grid; `snapshots` holds one
/// snapshot (or the Hankel sub-snapshots of one) per column.
ToEstimate estimate_relative_to_subspace(const CMat& snapshots, const SubspaceEstimate& est,
                                         const SearchGrid& grid, int blocks = 1);
ToEstimate estimate_relative_to_covariance(const CMat& snapshots, const CovarianceFactor& cov,
                                           const SearchGrid& grid, int blocks = 1);

/// Subarray size for initial snapshot t (1-based): floor((K+1)(t-1)/t).
int hankel_subarray_size(int K, int t);

/// Per antenna block, stacks the K-s+1 overlapping length-s windows of every column.
/// Output: [M*s x (K-s+1)*cols], sub-snapshot index varying fastest.
CMat hankel_smooth(const CMat& X, int K, int M, int s);

/// h .* conj(a^M(0, tau)).
CVec compensate_to(const CVec& h, double tau, const SystemConfig& cfg);
CMat compensate_to(const CMat& H, double tau, const SystemConfig& cfg);

struct AlignmentOptions {
  AlignMethod method = AlignMethod::subspace;
  int window = 48;
  int grid_size = 4096;
};

/// Sequential single-stream aligner (one writer).
class AlignmentState {
 public:
  AlignmentState(const SystemConfig& cfg, const AlignmentOptions& opts);

  /// Aligns the next snapshot and pushes it into the sliding window.
  CVec align_snapshot(const CVec& snapshot);

  int next_index() const { return processed_ + 1; }
  const std::vector<double>& relative_to() const { return relative_to_; }
  bool last_degenerate() const { return last_degenerate_; }
  int degenerate_count() const { return degenerate_count_; }
  CMat window() const;

 private:
  ToEstimate estimate(const CMat& window, const CMat& snapshots, int blocks) const;

  SystemConfig cfg_;
  AlignmentOptions opts_;
  SearchGrid grid_;
  std::deque<CVec> window_;
  std::vector<double> relative_to_;
  int processed_ = 0;
  bool last_degenerate_ = false;
  int degenerate_count_ = 0;
};

struct AlignmentResult {
  CsiMatrix aligned;
  RVec relative_to;  // per snapshot, s
  int degenerate_count = 0;
};

AlignmentResult align_stream(const CsiMatrix& raw, const SystemConfig& cfg,
                             const AlignmentOptions& opts);

/// Runs the initial procedure alone: aligns the first min(T_w, cols) snapshots.
CMat initial_align(const CMat& snapshots, const SystemConfig& cfg, const AlignmentOptions& opts);

}  // namespace ascsense
