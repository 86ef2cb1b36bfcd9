#include <cmath>

#include "dmaps/simd.hpp"

namespace dmaps::simd::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double l1_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

void accumulate_squared_difference(double* out, const double* x, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - c;
    out[i] += d * d;
  }
}

void accumulate_abs_difference(double* out, const double* x, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += std::fabs(x[i] - c);
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{dot, squared_distance, l1_distance, accumulate_squared_difference,
                             accumulate_abs_difference};
  return t;
}

}  // namespace dmaps::simd::scalar
