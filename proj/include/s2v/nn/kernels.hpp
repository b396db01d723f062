#pragma once

#include <cstddef>
#include <cstdint>

namespace s2v::nn {

/// C[m,n] += A[m,k] * B[k,n]; all row-major and densely packed.
void gemm_accumulate(std::size_t m, std::size_t k, std::size_t n, const double* a,
                     const double* b, double* c);

/// C[k,n] += A[m,k]^T * B[m,n], without materializing A^T.
void gemm_tn_accumulate(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                        double* c);

/// out[cols, rows] = in[rows, cols]^T
void transpose(std::size_t rows, std::size_t cols, const double* in, double* out);

/// Multiply-add count of every gemm executed on this thread. Used by the
/// compute-cost clock, which has to be reproducible run to run.
std::uint64_t flop_counter();
void reset_flop_counter();

}  // namespace s2v::nn
