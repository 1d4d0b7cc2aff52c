#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ascsense {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  degenerate,
  rank_deficient,
  infeasible,
  io,
  format,
};

const char* to_string(Errc code);

/// Library error. The code lets callers (notably the CLI) map failures to exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Wraps a delay into [0, period).
double wrap_delay(double tau, double period);

/// Wraps a phase into [-pi, pi).
double wrap_phase(double phi);

/// Shortest distance between two delays on the circle of circumference `period`.
double circular_distance(double a, double b, double period);

inline double delay_to_range(double tau) { return tau * kSpeedOfLight; }
inline double range_to_delay(double meters) { return meters / kSpeedOfLight; }

}  // namespace ascsense
