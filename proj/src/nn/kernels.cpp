#include "s2v/nn/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace s2v::nn {
namespace {

thread_local std::uint64_t g_flops = 0;

constexpr std::size_t kRowBlock = 4;
constexpr std::size_t kColBlock = 32;
constexpr std::size_t kDepthBlock = 256;

using Lane = double __attribute__((vector_size(64)));
constexpr std::size_t kLane = 8;

inline Lane load_lane(const double* p) {
  Lane v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

inline void store_lane(double* p, Lane v) { std::memcpy(p, &v, sizeof(v)); }

// Register tile: R rows of C by V lanes, accumulated over a depth slice.
// Element (row r, depth p) of A sits at a[r * rs + p * ds], which covers both
// A and A^T without copying.
template <std::size_t R, std::size_t V>
inline void tile(std::size_t k_begin, std::size_t k_end, std::size_t rs, std::size_t ds, std::size_t n,
                 const double* a, const double* b, double* c) {
  Lane acc[R][V];
#pragma GCC unroll 4
  for (std::size_t r = 0; r < R; ++r)
#pragma GCC unroll 4
    for (std::size_t v = 0; v < V; ++v) acc[r][v] = load_lane(c + r * n + v * kLane);
  for (std::size_t p = k_begin; p < k_end; ++p) {
    const double* brow = b + p * n;
    Lane bv[V];
#pragma GCC unroll 4
    for (std::size_t v = 0; v < V; ++v) bv[v] = load_lane(brow + v * kLane);
#pragma GCC unroll 4
    for (std::size_t r = 0; r < R; ++r) {
      const double av = a[r * rs + p * ds];
#pragma GCC unroll 4
      for (std::size_t v = 0; v < V; ++v) acc[r][v] += av * bv[v];
    }
  }
#pragma GCC unroll 4
  for (std::size_t r = 0; r < R; ++r)
#pragma GCC unroll 4
    for (std::size_t v = 0; v < V; ++v) store_lane(c + r * n + v * kLane, acc[r][v]);
}

template <std::size_t V>
inline void tile_rows(std::size_t rows, std::size_t k_begin, std::size_t k_end, std::size_t rs, std::size_t ds,
                      std::size_t n, const double* a, const double* b, double* c) {
  switch (rows) {
    case 1: tile<1, V>(k_begin, k_end, rs, ds, n, a, b, c); break;
    case 2: tile<2, V>(k_begin, k_end, rs, ds, n, a, b, c); break;
    case 3: tile<3, V>(k_begin, k_end, rs, ds, n, a, b, c); break;
    default: tile<4, V>(k_begin, k_end, rs, ds, n, a, b, c); break;
  }
}

inline void tile_any(std::size_t rows, std::size_t lanes, std::size_t k_begin, std::size_t k_end, std::size_t rs,
                     std::size_t ds, std::size_t n, const double* a, const double* b, double* c) {
  switch (lanes) {
    case 1: tile_rows<1>(rows, k_begin, k_end, rs, ds, n, a, b, c); break;
    case 2: tile_rows<2>(rows, k_begin, k_end, rs, ds, n, a, b, c); break;
    case 3: tile_rows<3>(rows, k_begin, k_end, rs, ds, n, a, b, c); break;
    default: tile_rows<4>(rows, k_begin, k_end, rs, ds, n, a, b, c); break;
  }
}

// n is a multiple of the lane width here.
void gemm_lanes(std::size_t m, std::size_t k, std::size_t n, const double* a, std::size_t rs, std::size_t ds,
                const double* b, double* c) {
  for (std::size_t kb = 0; kb < k; kb += kDepthBlock) {
    const std::size_t ke = std::min(k, kb + kDepthBlock);
    for (std::size_t jb = 0; jb < n; jb += kColBlock) {
      const std::size_t lanes = std::min(kColBlock, n - jb) / kLane;
      for (std::size_t i = 0; i < m; i += kRowBlock)
        tile_any(std::min(kRowBlock, m - i), lanes, kb, ke, rs, ds, n, a + i * rs, b + jb, c + i * n + jb);
    }
  }
}

// Any n: pads B and C columns to the lane width when needed.
void gemm_strided(std::size_t m, std::size_t k, std::size_t n, const double* a, std::size_t rs, std::size_t ds,
                  const double* b, double* c) {
  if (n % kLane == 0) {
    gemm_lanes(m, k, n, a, rs, ds, b, c);
    return;
  }
  const std::size_t np = (n + kLane - 1) / kLane * kLane;
  std::vector<double> bp(k * np, 0.0), cp(m * np, 0.0);
  for (std::size_t p = 0; p < k; ++p) std::copy_n(b + p * n, n, bp.data() + p * np);
  for (std::size_t i = 0; i < m; ++i) std::copy_n(c + i * n, n, cp.data() + i * np);
  gemm_lanes(m, k, np, a, rs, ds, bp.data(), cp.data());
  for (std::size_t i = 0; i < m; ++i) std::copy_n(cp.data() + i * np, n, c + i * n);
}

// Very narrow outputs (critic heads, small action dims): dot products against B^T.
void gemm_narrow(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                 double* c) {
  std::vector<double> bt(k * n);
  transpose(k, n, b, bt.data());
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bcol = bt.data() + j * k;
      Lane acc{};
      std::size_t p = 0;
      for (; p + kLane <= k; p += kLane) acc += load_lane(arow + p) * load_lane(bcol + p);
      double sum = 0.0;
      for (std::size_t l = 0; l < kLane; ++l) sum += acc[l];
      for (; p < k; ++p) sum += arow[p] * bcol[p];
      c[i * n + j] += sum;
    }
  }
}

}  // namespace

void gemm_accumulate(std::size_t m, std::size_t k, std::size_t n, const double* a,
                     const double* b, double* c) {
  g_flops += 2 * static_cast<std::uint64_t>(m) * k * n;
  if (m == 0 || n == 0 || k == 0) return;
  if (n < kLane && k >= 2 * kLane) {
    gemm_narrow(m, k, n, a, b, c);
    return;
  }
  gemm_strided(m, k, n, a, k, 1, b, c);
}

void gemm_tn_accumulate(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                        double* c) {
  g_flops += 2 * static_cast<std::uint64_t>(m) * k * n;
  if (m == 0 || n == 0 || k == 0) return;
  gemm_strided(k, m, n, a, 1, k, b, c);
}

void transpose(std::size_t rows, std::size_t cols, const double* in, double* out) {
  // 16x16 blocks: with 32 the output lines of a block, at a power-of-two
  // stride, overflow the L1 sets they map to.
  constexpr std::size_t kBlock = 16;
  for (std::size_t ib = 0; ib < rows; ib += kBlock) {
    const std::size_t ie = std::min(rows, ib + kBlock);
    for (std::size_t jb = 0; jb < cols; jb += kBlock) {
      const std::size_t je = std::min(cols, jb + kBlock);
      for (std::size_t j = jb; j < je; ++j)
        for (std::size_t i = ib; i < ie; ++i) out[j * rows + i] = in[i * cols + j];
    }
  }
}

std::uint64_t flop_counter() { return g_flops; }
void reset_flop_counter() { g_flops = 0; }

}  // namespace s2v::nn
