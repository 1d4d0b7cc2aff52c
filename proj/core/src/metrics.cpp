#include "ascsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ascsense/param_estimation.hpp"
#include "ascsense/residual_compensation.hpp"

namespace ascsense {

double gamma_beta(const CVec& estimate, const CVec& truth) {
  const double p = truth.squaredNorm();
  if (!(p > 0.0)) throw Error(Errc::invalid_argument, "gamma_beta: zero truth");
  const RotationTranslation fit = align_rotation_translation(estimate, truth);
  const double e = (fit.aligned - truth).squaredNorm();
  if (!(e > 0.0)) return kGammaCapDb;
  return std::min(kGammaCapDb, 10.0 * std::log10(p / e));
}

double gamma_ideal(const CVec& truth, int MK, double noise_power) {
  if (truth.size() == 0) throw Error(Errc::invalid_argument, "gamma_ideal: empty CGS");
  if (!(noise_power > 0.0)) return kGammaCapDb;
  const double g = MK * truth.squaredNorm() / truth.size() / noise_power;
  return std::min(kGammaCapDb, 10.0 * std::log10(g));
}

ToErrors to_errors(const RVec& true_to, const RVec& estimated_to, double residual_estimate,
                   double period) {
  if (true_to.size() != estimated_to.size() || true_to.size() == 0)
    throw Error(Errc::dimension_mismatch, "TO error inputs must be equal and non-empty");
  const Eigen::Index T = true_to.size();
  ToErrors out;
  out.residual.resize(T);
  for (Eigen::Index t = 0; t < T; ++t)
    out.residual(t) = wrap_delay(true_to(t) - estimated_to(t), period);
  out.common = circular_mean(out.residual, period);
  out.relative.resize(T);
  out.absolute.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    out.relative(t) = circular_distance(out.residual(t), out.common, period);
    out.absolute(t) = circular_distance(out.residual(t) - residual_estimate, 0.0, period);
  }
  return out;
}

std::vector<int> match_targets(const RMat& cost) {
  const int n_truth = static_cast<int>(cost.rows());
  const int n_est = static_cast<int>(cost.cols());
  if (n_truth > 8 || n_est > 8) throw Error(Errc::invalid_argument, "match_targets: too many targets");
  std::vector<int> best(n_truth, -1);
  if (n_truth == 0 || n_est == 0) return best;

  // Permute slots: estimate indices padded with -1 placeholders for missing estimates.
  const int slots = std::max(n_truth, n_est);
  std::vector<int> perm(slots);
  std::iota(perm.begin(), perm.end(), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < n_truth; ++i)
      if (perm[i] < n_est) c += cost(i, perm[i]);
    if (c < best_cost) {
      best_cost = c;
      for (int i = 0; i < n_truth; ++i) best[i] = perm[i] < n_est ? perm[i] : -1;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double quantile(std::vector<double> v, double q) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (q < 0.0 || q > 1.0) throw Error(Errc::invalid_argument, "quantile outside [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double resolution_probability(const std::vector<bool>& successes) {
  if (successes.empty()) throw Error(Errc::invalid_argument, "resolution probability of no trials");
  const auto n = std::count(successes.begin(), successes.end(), true);
  return static_cast<double>(n) / static_cast<double>(successes.size());
}

}  // namespace ascsense
