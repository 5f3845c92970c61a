#pragma once
// Quadrature reductions. The parallel versions split the index range into
// fixed-size blocks, sum each block serially and combine the block partials
// in index order, so the result does not depend on the thread count.
// The serial namespace holds a plain left-to-right reference used by tests
// and the benchmark.

#include <cstddef>
#include <vector>

#include <omp.h>

namespace wentropy::kernels {

inline constexpr std::size_t kBlock = 2048;

// Sum of term(i) for i in [0, n).
template <class Term>
double reduce_sum(std::size_t n, Term&& term) {
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  if (nblocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

// Vector-valued sum: term(i, out) adds its k contributions into out[0..k).
template <class Term>
std::vector<double> reduce_sum_vec(std::size_t n, std::size_t k, Term&& term) {
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks * k, 0.0);
#pragma omp parallel for schedule(static) if (nblocks > 1)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
    double* out = partial.data() + static_cast<std::size_t>(b) * k;
    for (std::size_t i = lo; i < hi; ++i) term(i, out);
  }
  std::vector<double> s(k, 0.0);
  for (std::size_t b = 0; b < nblocks; ++b)
    for (std::size_t j = 0; j < k; ++j) s[j] += partial[b * k + j];
  return s;
}

namespace serial {

template <class Term>
double reduce_sum(std::size_t n, Term&& term) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += term(i);
  return s;
}

template <class Term>
std::vector<double> reduce_sum_vec(std::size_t n, std::size_t k, Term&& term) {
  std::vector<double> s(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) term(i, s.data());
  return s;
}

}  // namespace serial

}  // namespace wentropy::kernels
