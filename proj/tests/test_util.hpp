#pragma once

#include <complex>
#include <cstdint>

#include "ascsense/common.hpp"
#include "ascsense/rng.hpp"

namespace testutil {

using ascsense::CMat;
using ascsense::CVec;
using ascsense::RVec;

inline CMat random_matrix(std::uint64_t key, int rows, int cols) {
  ascsense::CounterRng rng(key);
  CMat X(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) X(i, j) = rng.complex_normal();
  return X;
}

inline CVec random_vector(std::uint64_t key, int n) { return random_matrix(key, n, 1).col(0); }

// Steering vector written out from the definition, independent of the library.
inline CVec plain_steering(int K, double delta_f, double tau) {
  CVec a(K);
  for (int k = 0; k < K; ++k)
    a(k) = std::exp(std::complex<double>(0.0, -2.0 * ascsense::kPi * k * delta_f * tau));
  return a;
}

inline double max_rel(const RVec& x, const RVec& ref) {
  return (x - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

}  // namespace testutil
