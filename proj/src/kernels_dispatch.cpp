#include <cstdlib>
#include <string>

#include "posh/errors.hpp"
#include "posh/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <cpuid.h>
#endif

namespace posh::kernels {

#if defined(__x86_64__) || defined(_M_X64)

#if defined(POSH_BUILD_AVX2)
const KernelTable* avx2_table_impl();
#endif

bool cpu_has_avx2() {
  unsigned eax, ebx, ecx, edx;
  if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
  const bool avx2 = (ebx & (1u << 5)) != 0;
  if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx)) return false;
  const bool fma = (ecx & (1u << 12)) != 0;
  const bool popcnt = (ecx & (1u << 23)) != 0;
  return avx2 && fma && popcnt;
}

const KernelTable* avx2_table() {
#if defined(POSH_BUILD_AVX2)
  return cpu_has_avx2() ? avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

#endif  // x86_64

namespace {

const KernelTable* pick_active() {
  const char* env = std::getenv("POSH_SIMD");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return &scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
  if (want == "avx2") {
    const KernelTable* t = avx2_table();
    if (!t) raise(Errc::ConfigError, "POSH_SIMD=avx2 but AVX2 is unavailable");
    return t;
  }
  if (want == "auto") {
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
  }
#endif
#if defined(__aarch64__)
  if (want == "neon" || want == "auto") return neon_table();
#endif
  if (want == "auto") return &scalar_table();
  raise(Errc::ConfigError, "unknown POSH_SIMD value: " + want);
}

}  // namespace

const KernelTable& active_table() {
  static const KernelTable* table = pick_active();
  return *table;
}

std::vector<const KernelTable*> runnable_tables() {
  std::vector<const KernelTable*> v{&scalar_table()};
#if defined(__x86_64__) || defined(_M_X64)
  if (const KernelTable* t = avx2_table()) v.push_back(t);
#endif
#if defined(__aarch64__)
  v.push_back(neon_table());
#endif
  return v;
}

std::uint32_t hamming(const std::uint8_t* a, const std::uint8_t* b, std::size_t n_bits) {
  std::uint32_t d = 0;
  active_table().hamming_scan(a, b, 1, (n_bits + 7) / 8, n_bits, &d);
  return d;
}

}  // namespace posh::kernels
