#include "ascsense/common.hpp"

#include <cmath>

namespace ascsense {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::degenerate: return "degenerate input";
    case Errc::rank_deficient: return "rank deficient";
    case Errc::infeasible: return "infeasible specification";
    case Errc::io: return "i/o failure";
    case Errc::format: return "malformed data";
  }
  return "unknown";
}

double wrap_delay(double tau, double period) {
  double r = std::fmod(tau, period);
  if (r < 0.0) r += period;
  // fmod can return `period` itself after the correction above for tiny negatives.
  if (r >= period) r -= period;
  return r;
}

double wrap_phase(double phi) {
  double r = std::fmod(phi + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r - kPi;
}

double circular_distance(double a, double b, double period) {
  const double d = wrap_delay(a - b, period);
  return std::min(d, period - d);
}

}  // namespace ascsense
