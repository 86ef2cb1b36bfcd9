#include <atomic>
#include <cstdlib>
#include <string>

#include "dmaps/error.hpp"
#include "dmaps/simd.hpp"

namespace dmaps::simd {
namespace {

bool cpu_has_avx2() {
#if defined(DMAPS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table_for(Isa isa) {
#if defined(DMAPS_HAVE_AVX2)
  if (isa == Isa::Avx2) return avx2::table();
#endif
  (void)isa;
  return scalar::table();
}

Isa detect() {
  if (const char* env = std::getenv("DMAPS_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidData("simd kernel: operand lengths differ");
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw InvalidParameter("simd: instruction set '" + std::string(isa_name(isa)) + "' is not available");
  }
  active().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernels() { return table_for(active_isa()); }

double dot(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return kernels().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return kernels().squared_distance(a.data(), b.data(), a.size());
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return kernels().l1_distance(a.data(), b.data(), a.size());
}

void accumulate_squared_difference(std::span<double> out, std::span<const double> x, double c) {
  check_lengths(out.size(), x.size());
  kernels().accumulate_squared_difference(out.data(), x.data(), c, out.size());
}

void accumulate_abs_difference(std::span<double> out, std::span<const double> x, double c) {
  check_lengths(out.size(), x.size());
  kernels().accumulate_abs_difference(out.data(), x.data(), c, out.size());
}

}  // namespace dmaps::simd
