#pragma once

#include <cstdint>
#include <limits>

#include "ascsense/common.hpp"

namespace ascsense {

/// Independent random streams drawn for one Monte Carlo trial.
enum class Stream : std::uint64_t {
  scenario = 1,
  noise = 2,
  calibration = 3,
  clock = 4,
  aux = 5,
};

/// Counter-based generator: output i is a keyed SplitMix64 hash of i, so any
/// (trial, stream) pair owns a reproducible sequence independent of
/// evaluation order or thread placement.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Key derived from the master seed and the (point, trial, stream) coordinates.
  static std::uint64_t derive_key(std::uint64_t master, std::uint64_t point, std::uint64_t trial,
                                  Stream stream);
  static CounterRng for_stream(std::uint64_t master, std::uint64_t point, std::uint64_t trial,
                               Stream stream) {
    return CounterRng(derive_key(master, point, trial, stream));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Circular complex Gaussian with E|z|^2 = variance.
  cd complex_normal(double variance = 1.0);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ascsense
