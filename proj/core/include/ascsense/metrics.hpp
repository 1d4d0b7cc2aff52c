#pragma once

#include <vector>

#include "ascsense/common.hpp"

namespace ascsense {

inline constexpr double kGammaCapDb = 300.0;

/// 10 log10(|truth|^2 / |aligned - truth|^2) after the rotation+translation fit; capped.
double gamma_beta(const CVec& estimate, const CVec& truth);

/// Idealized CGS SNR (dB): MK * mean|beta|^2 / noise_power.
double gamma_ideal(const CVec& truth, int MK, double noise_power);

struct ToErrors {
  RVec residual;   // e_t = wrap(tau_o,t - estimated relative TO)
  double common = 0.0;  // circular mean of e_t
  RVec relative;   // circdist(e_t, common), s
  RVec absolute;   // circdist(e_t - residual estimate, 0), s
};

/// TO errors of an aligned (and compensated) stream.
ToErrors to_errors(const RVec& true_to, const RVec& estimated_to, double residual_estimate,
                   double period);

/// Assignment of estimates to truths minimizing the summed cost (brute force, small sizes).
/// Result[i] = estimate index for truth i, or -1 when there are fewer estimates than truths.
std::vector<int> match_targets(const RMat& cost);

double median(std::vector<double> v);
/// Type-7 (linear interpolation) sample quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);

/// Probability of resolution: fraction of `successes` set; throws on an empty set.
double resolution_probability(const std::vector<bool>& successes);

}  // namespace ascsense
