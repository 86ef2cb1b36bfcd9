#pragma once

// Data-parallel inner loops used by the distance, kernel and regression code.
//
// Every kernel exists as a portable scalar reference in `simd::scalar` and,
// on x86-64 builds, as an AVX2/FMA variant in `simd::avx2`. The free functions
// in `simd::` forward to whichever table was selected at startup. Variants are
// interchangeable up to floating-point summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace dmaps::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Instruction set of the kernels currently in use. Chosen once from CPUID;
/// the environment variable DMAPS_SIMD=scalar pins the scalar reference.
Isa active_isa();

/// Whether the running CPU and this build both support `isa`.
bool isa_available(Isa isa);

/// Overrides the active kernel table. Throws InvalidParameter when `isa` is
/// not available. Not thread-safe with respect to concurrent kernel calls.
void set_active_isa(Isa isa);

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  // out[j] += (x[j] - c)^2
  void (*accumulate_squared_difference)(double* out, const double* x, double c, std::size_t n);
  // out[j] += |x[j] - c|
  void (*accumulate_abs_difference)(double* out, const double* x, double c, std::size_t n);
};

const KernelTable& kernels();

namespace scalar {
const KernelTable& table();
}

#if defined(DMAPS_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

// Span-based conveniences over the active table. Lengths must match.
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double l1_distance(std::span<const double> a, std::span<const double> b);
void accumulate_squared_difference(std::span<double> out, std::span<const double> x, double c);
void accumulate_abs_difference(std::span<double> out, std::span<const double> x, double c);

}  // namespace dmaps::simd
