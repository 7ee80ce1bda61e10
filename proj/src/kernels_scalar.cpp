#include <bit>
#include <cstring>

#include "posh/kernels.hpp"

// Reference kernels. Plain loops, no intrinsics; these define the semantics
// the SIMD variants must reproduce.

namespace posh::kernels {
namespace {

void matmul_nn_scalar(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                      std::size_t p, bool accumulate) {
  if (!accumulate) std::memset(c, 0, n * p * sizeof(float));
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const float av = ai[kk];
      const float* bk = b + kk * p;
      for (std::size_t j = 0; j < p; ++j) ci[j] += av * bk[j];
    }
  }
}

void matmul_nt_scalar(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                      std::size_t p, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * p;
    for (std::size_t j = 0; j < p; ++j) {
      const float* bj = b + j * k;
      float s = 0.0f;
      for (std::size_t kk = 0; kk < k; ++kk) s += ai[kk] * bj[kk];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

void matmul_tn_scalar(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                      std::size_t p, bool accumulate) {
  if (!accumulate) std::memset(c, 0, k * p * sizeof(float));
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a + i * k;
    const float* bi = b + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const float av = ai[kk];
      float* ck = c + kk * p;
      for (std::size_t j = 0; j < p; ++j) ck[j] += av * bi[j];
    }
  }
}

void hamming_scan_scalar(const std::uint8_t* query, const std::uint8_t* codes,
                         std::size_t n_codes, std::size_t code_bytes, std::size_t n_bits,
                         std::uint32_t* out) {
  // Mask for pad bits in the final byte (bit k lives at byte k/8, position k%8).
  const std::uint8_t last_mask =
      (n_bits % 8 == 0) ? 0xFF : static_cast<std::uint8_t>((1u << (n_bits % 8)) - 1);

  for (std::size_t e = 0; e < n_codes; ++e) {
    const std::uint8_t* code = codes + e * code_bytes;
    std::uint32_t d = 0;
    for (std::size_t i = 0; i < code_bytes; ++i) {
      std::uint8_t x = static_cast<std::uint8_t>(query[i] ^ code[i]);
      if (i == code_bytes - 1) x &= last_mask;
      d += static_cast<std::uint32_t>(std::popcount(static_cast<unsigned>(x)));
    }
    out[e] = d;
  }
}

const KernelTable kScalar{"scalar", matmul_nn_scalar, matmul_nt_scalar, matmul_tn_scalar,
                          hamming_scan_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace posh::kernels
