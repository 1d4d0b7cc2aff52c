#include "ascsense/rng.hpp"

#include <cmath>

namespace ascsense {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::derive_key(std::uint64_t master, std::uint64_t point,
                                     std::uint64_t trial, Stream stream) {
  std::uint64_t k = splitmix64(master ^ 0x6A09E667F3BCC908ULL);
  k = splitmix64(k ^ (point * 0xBB67AE8584CAA73BULL));
  k = splitmix64(k ^ (trial * 0x3C6EF372FE94F82BULL));
  k = splitmix64(k ^ (static_cast<std::uint64_t>(stream) * 0xA54FF53A5F1D36F1ULL));
  return k;
}

CounterRng::result_type CounterRng::operator()() {
  const std::uint64_t c = counter_++;
  return splitmix64(key_ ^ splitmix64(c));
}

double CounterRng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

cd CounterRng::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

}  // namespace ascsense
