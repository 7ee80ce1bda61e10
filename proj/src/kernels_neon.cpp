// NEON kernel variants for aarch64. Mirrors the AVX2 file; NEON is baseline
// on aarch64 so no runtime feature check is needed.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstring>

#include "posh/kernels.hpp"

namespace posh::kernels {
namespace {

void matmul_nn_neon(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                    std::size_t p, bool accumulate) {
  if (!accumulate) std::memset(c, 0, n * p * sizeof(float));
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const float32x4_t av = vdupq_n_f32(ai[kk]);
      const float* bk = b + kk * p;
      std::size_t j = 0;
      for (; j + 8 <= p; j += 8) {
        float32x4_t c0 = vld1q_f32(ci + j);
        float32x4_t c1 = vld1q_f32(ci + j + 4);
        c0 = vfmaq_f32(c0, av, vld1q_f32(bk + j));
        c1 = vfmaq_f32(c1, av, vld1q_f32(bk + j + 4));
        vst1q_f32(ci + j, c0);
        vst1q_f32(ci + j + 4, c1);
      }
      for (; j + 4 <= p; j += 4) {
        float32x4_t c0 = vld1q_f32(ci + j);
        c0 = vfmaq_f32(c0, av, vld1q_f32(bk + j));
        vst1q_f32(ci + j, c0);
      }
      const float avs = ai[kk];
      for (; j < p; ++j) ci[j] += avs * bk[j];
    }
  }
}

void matmul_nt_neon(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                    std::size_t p, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * p;
    for (std::size_t j = 0; j < p; ++j) {
      const float* bj = b + j * k;
      float32x4_t acc = vdupq_n_f32(0.0f);
      std::size_t kk = 0;
      for (; kk + 4 <= k; kk += 4)
        acc = vfmaq_f32(acc, vld1q_f32(ai + kk), vld1q_f32(bj + kk));
      float s = vaddvq_f32(acc);
      for (; kk < k; ++kk) s += ai[kk] * bj[kk];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

void matmul_tn_neon(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                    std::size_t p, bool accumulate) {
  if (!accumulate) std::memset(c, 0, k * p * sizeof(float));
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    const float* bi = b + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const float32x4_t av = vdupq_n_f32(ai[kk]);
      float* ck = c + kk * p;
      std::size_t j = 0;
      for (; j + 4 <= p; j += 4) {
        float32x4_t cv = vld1q_f32(ck + j);
        cv = vfmaq_f32(cv, av, vld1q_f32(bi + j));
        vst1q_f32(ck + j, cv);
      }
      const float avs = ai[kk];
      for (; j < p; ++j) ck[j] += avs * bi[j];
    }
  }
}

void hamming_scan_neon(const std::uint8_t* query, const std::uint8_t* codes, std::size_t n_codes,
                       std::size_t code_bytes, std::size_t n_bits, std::uint32_t* out) {
  const std::size_t blocks = code_bytes / 16;
  const std::size_t rest = code_bytes % 16;
  const std::uint8_t last_mask =
      (n_bits % 8 == 0) ? 0xFF : static_cast<std::uint8_t>((1u << (n_bits % 8)) - 1);

  for (std::size_t e = 0; e < n_codes; ++e) {
    const std::uint8_t* code = codes + e * code_bytes;
    std::uint32_t d = 0;
    uint16x8_t acc = vdupq_n_u16(0);
    for (std::size_t bku = 0; bku < blocks; ++bku) {
      uint8x16_t x = veorq_u8(vld1q_u8(query + bku * 16), vld1q_u8(code + bku * 16));
      if (rest == 0 && bku == blocks - 1 && last_mask != 0xFF) {
        uint8x16_t m = vdupq_n_u8(0xFF);
        m = vsetq_lane_u8(last_mask, m, 15);
        x = vandq_u8(x, m);
      }
      acc = vpadalq_u8(acc, vcntq_u8(x));
    }
    d += vaddvq_u16(acc);
    for (std::size_t i = 0; i < rest; ++i) {
      std::uint8_t x = static_cast<std::uint8_t>(query[blocks * 16 + i] ^ code[blocks * 16 + i]);
      if (i == rest - 1) x &= last_mask;
      d += static_cast<std::uint32_t>(__builtin_popcount(static_cast<unsigned>(x)));
    }
    out[e] = d;
  }
}

const KernelTable kNeon{"neon", matmul_nn_neon, matmul_nt_neon, matmul_tn_neon,
                        hamming_scan_neon};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace posh::kernels

#endif  // __aarch64__
