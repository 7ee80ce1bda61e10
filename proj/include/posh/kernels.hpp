#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Data-parallel inner loops with scalar reference implementations and SIMD
// variants (AVX2 on x86-64, NEON on aarch64) selected at runtime. Every
// variant is equivalence-tested against the scalar reference; callers go
// through the active() table and never need to know which ISA is in use.
//
// Matmul kernels operate on dense row-major float buffers:
//   matmul_nn: C[n x p] (+)= A[n x k] * B[k x p]
//   matmul_nt: C[n x p] (+)= A[n x k] * B^T     (B is [p x k])
//   matmul_tn: C[k x p] (+)= A^T * B            (A is [n x k], B is [n x p])
//
// hamming_scan computes, for one query code, the Hamming distance to each of
// n_codes packed codes laid out contiguously with a fixed byte stride; pad
// bits past n_bits in the last byte are masked out.

namespace posh::kernels {

using MatmulFn = void (*)(const float* a, const float* b, float* c, std::size_t n, std::size_t k,
                          std::size_t p, bool accumulate);
using HammingScanFn = void (*)(const std::uint8_t* query, const std::uint8_t* codes,
                               std::size_t n_codes, std::size_t code_bytes, std::size_t n_bits,
                               std::uint32_t* out);

struct KernelTable {
  const char* name;
  MatmulFn matmul_nn;
  MatmulFn matmul_nt;
  MatmulFn matmul_tn;
  HammingScanFn hamming_scan;
};

/// Portable reference implementations.
const KernelTable& scalar_table();

/// Best table supported by this CPU; POSH_SIMD=scalar|avx2|neon overrides.
const KernelTable& active_table();

/// All tables compiled in and runnable on this CPU (for equivalence tests).
std::vector<const KernelTable*> runnable_tables();

/// Hamming distance between two packed codes of n_bits.
std::uint32_t hamming(const std::uint8_t* a, const std::uint8_t* b, std::size_t n_bits);

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable* avx2_table();  // null when unsupported at build time
bool cpu_has_avx2();
#endif
#if defined(__aarch64__)
const KernelTable* neon_table();
#endif

}  // namespace posh::kernels
