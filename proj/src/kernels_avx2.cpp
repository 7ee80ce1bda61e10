// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma -mpopcnt; the dispatcher only hands out this table after a
// runtime CPUID check, so the rest of the binary stays baseline-safe.

#if defined(__x86_64__) || defined(_M_X64)
#if defined(POSH_BUILD_AVX2)

#include <immintrin.h>

#include <cstring>

#include "posh/kernels.hpp"

namespace posh::kernels {
namespace {

void matmul_nn_avx2(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                    std::size_t p, bool accumulate) {
  if (!accumulate) std::memset(c, 0, n * p * sizeof(float));
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const __m256 av = _mm256_set1_ps(ai[kk]);
      const float* bk = b + kk * p;
      std::size_t j = 0;
      for (; j + 16 <= p; j += 16) {
        __m256 c0 = _mm256_loadu_ps(ci + j);
        __m256 c1 = _mm256_loadu_ps(ci + j + 8);
        c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bk + j), c0);
        c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bk + j + 8), c1);
        _mm256_storeu_ps(ci + j, c0);
        _mm256_storeu_ps(ci + j + 8, c1);
      }
      for (; j + 8 <= p; j += 8) {
        __m256 c0 = _mm256_loadu_ps(ci + j);
        c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bk + j), c0);
        _mm256_storeu_ps(ci + j, c0);
      }
      const float avs = ai[kk];
      for (; j < p; ++j) ci[j] += avs * bk[j];
    }
  }
}

float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

void matmul_nt_avx2(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                    std::size_t p, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * p;
    for (std::size_t j = 0; j < p; ++j) {
      const float* bj = b + j * k;
      __m256 acc = _mm256_setzero_ps();
      std::size_t kk = 0;
      for (; kk + 8 <= k; kk += 8)
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(ai + kk), _mm256_loadu_ps(bj + kk), acc);
      float s = hsum8(acc);
      for (; kk < k; ++kk) s += ai[kk] * bj[kk];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

void matmul_tn_avx2(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                    std::size_t p, bool accumulate) {
  if (!accumulate) std::memset(c, 0, k * p * sizeof(float));
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    const float* bi = b + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const __m256 av = _mm256_set1_ps(ai[kk]);
      float* ck = c + kk * p;
      std::size_t j = 0;
      for (; j + 8 <= p; j += 8) {
        __m256 cv = _mm256_loadu_ps(ck + j);
        cv = _mm256_fmadd_ps(av, _mm256_loadu_ps(bi + j), cv);
        _mm256_storeu_ps(ck + j, cv);
      }
      const float avs = ai[kk];
      for (; j < p; ++j) ck[j] += avs * bi[j];
    }
  }
}

void hamming_scan_avx2(const std::uint8_t* query, const std::uint8_t* codes, std::size_t n_codes,
                       std::size_t code_bytes, std::size_t n_bits, std::uint32_t* out) {
  const std::size_t words = code_bytes / 8;
  const std::size_t tail = code_bytes % 8;
  // Valid bits in the final 64-bit chunk (full words precede it).
  std::uint64_t last_mask = ~std::uint64_t{0};
  if (n_bits % 64 != 0) last_mask >>= (64 - n_bits % 64);

  std::uint64_t qtail = 0;
  if (tail) std::memcpy(&qtail, query + words * 8, tail);

  for (std::size_t e = 0; e < n_codes; ++e) {
    const std::uint8_t* code = codes + e * code_bytes;
    std::uint64_t d = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t qv, cv;
      std::memcpy(&qv, query + w * 8, 8);
      std::memcpy(&cv, code + w * 8, 8);
      std::uint64_t x = qv ^ cv;
      if (tail == 0 && w == words - 1) x &= last_mask;
      d += static_cast<std::uint64_t>(_mm_popcnt_u64(x));
    }
    if (tail) {
      std::uint64_t cv = 0;
      std::memcpy(&cv, code + words * 8, tail);
      d += static_cast<std::uint64_t>(_mm_popcnt_u64((qtail ^ cv) & last_mask));
    }
    out[e] = static_cast<std::uint32_t>(d);
  }
}

const KernelTable kAvx2{"avx2", matmul_nn_avx2, matmul_nt_avx2, matmul_tn_avx2,
                        hamming_scan_avx2};

}  // namespace

const KernelTable* avx2_table_impl() { return &kAvx2; }

}  // namespace posh::kernels

#endif  // POSH_BUILD_AVX2
#endif  // x86_64
