#pragma once

#include "ascsense/common.hpp"

namespace ascsense {

struct SystemConfig;

/// Uniform delay grid tau_n = origin + n * step, n = 0..size-1, covering one alias period.
struct SearchGrid {
  int size = 4096;
  double step = 0.0;
  double origin = 0.0;

  static SearchGrid for_system(const SystemConfig& cfg, int size = 4096, double origin = 0.0);
  double at(double n) const { return origin + n * step; }
  double period() const { return size * step; }
  /// Throws unless size is a power of two and >= 8 * K.
  void validate(int K) const;
};

struct EvdResult {
  RVec eigenvalues;  // descending
  CMat eigenvectors; // columns match eigenvalues
};

EvdResult hermitian_evd(const CMat& R);

struct PinvResult {
  CMat pinv;
  int rank = 0;
  double condition = 0.0;
  bool rank_deficient = false;
};

/// Moore-Penrose inverse via SVD; singular values below rcond * s_max are dropped.
PinvResult pseudo_inverse(const CMat& A, double rcond = 1e-12);

/// Orthonormal basis N [m x (m-n)] of the complement of range(A), N^H A = 0.
CMat orthonormal_nullspace(const CMat& A);

/// out[n] = sum_c |FFT_N(fold(conj(h) .* F[:,c]))[n]|^2, i.e. the quadratic form
/// h^H diag(a(tau_n)) F F^H diag(a*(tau_n)) h with a = a^M(0, tau). `blocks` = M
/// folds the antenna blocks of an MK-row input before the transform.
RVec fft_spectrum(const CVec& h, const CMat& F, const SearchGrid& grid, int blocks = 1);

/// Same objective as fft_spectrum summed over the columns of H, computed from the kernel
/// P = F F^H via its lag sums: one transform regardless of rank or column count.
RVec kernel_spectrum(const CMat& H, const CMat& P, const SearchGrid& grid, int blocks = 1);

/// out[n] = a^H P a for a = spatial (x) a(tau_n); spatial has length blocks.
RVec steering_quadratic_spectrum(const CMat& P, const CVec& spatial, const SearchGrid& grid);

/// Forward DFT (e^{-j 2 pi k n / N}) of x zero-padded to N.
CVec zero_padded_fft(const CVec& x, int N);

/// Vertex offset in [-0.5, 0.5] of the parabola through three equally spaced samples.
double parabolic_offset(double ym, double y0, double yp);

struct Extremum {
  int index = 0;
  double position = 0.0;  // refined, in grid units of the axis (delay: seconds, wrapped)
  double value = 0.0;
};

/// Grid minimum of a circular spectrum with parabolic refinement (linear domain).
Extremum refined_argmin(const RVec& s, const SearchGrid& grid);
/// Grid maximum of a circular spectrum; refinement fits the parabola on 1/s.
Extremum refined_argmax(const RVec& s, const SearchGrid& grid);

bool is_power_of_two(int n);

}  // namespace ascsense
