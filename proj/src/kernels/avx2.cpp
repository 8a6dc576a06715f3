// AVX2/FMA variants. Compiled for the baseline target; each function carries
// its own target attribute so the binary still runs on CPUs without AVX2 and
// the dispatcher decides at runtime.

#include <immintrin.h>

#include <cmath>
#include <vector>

#include "semgan/kernels.hpp"

#define SEMGAN_AVX2 __attribute__((target("avx2,fma")))

namespace semgan::kernels::avx2 {
namespace {

alignas(32) constexpr int kMaskTable[16] = {-1, -1, -1, -1, -1, -1, -1, -1,
                                             0,  0,  0,  0,  0,  0,  0,  0};

SEMGAN_AVX2 inline __m256i lane_mask(int count) {
  return _mm256_loadu_si256(
      reinterpret_cast<const __m256i*>(kMaskTable + 8 - count));
}

// R rows x (8 * V) columns of C. `cols` < 8 * V only on the right edge.
template <int R, int V, bool Full>
SEMGAN_AVX2 void micro_kernel(int k, const float* a, int lda, const float* b,
                              int ldb, float* c, int ldc, int cols,
                              bool accumulate) {
  __m256 acc[R][V];
  for (int r = 0; r < R; ++r)
    for (int v = 0; v < V; ++v) acc[r][v] = _mm256_setzero_ps();

  __m256i mask[V];
  if constexpr (!Full) {
    for (int v = 0; v < V; ++v) {
      int lanes = cols - 8 * v;
      lanes = lanes < 0 ? 0 : (lanes > 8 ? 8 : lanes);
      mask[v] = lane_mask(lanes);
    }
  }

  for (int p = 0; p < k; ++p) {
    const float* brow = b + static_cast<std::ptrdiff_t>(p) * ldb;
    __m256 bv[V];
    for (int v = 0; v < V; ++v) {
      if constexpr (Full) {
        bv[v] = _mm256_loadu_ps(brow + 8 * v);
      } else {
        bv[v] = _mm256_maskload_ps(brow + 8 * v, mask[v]);
      }
    }
    for (int r = 0; r < R; ++r) {
      const __m256 av =
          _mm256_broadcast_ss(a + static_cast<std::ptrdiff_t>(r) * lda + p);
      for (int v = 0; v < V; ++v) acc[r][v] = _mm256_fmadd_ps(av, bv[v], acc[r][v]);
    }
  }

  for (int r = 0; r < R; ++r) {
    float* crow = c + static_cast<std::ptrdiff_t>(r) * ldc;
    for (int v = 0; v < V; ++v) {
      if constexpr (Full) {
        __m256 out = acc[r][v];
        if (accumulate) out = _mm256_add_ps(out, _mm256_loadu_ps(crow + 8 * v));
        _mm256_storeu_ps(crow + 8 * v, out);
      } else {
        __m256 out = acc[r][v];
        if (accumulate) {
          out = _mm256_add_ps(out, _mm256_maskload_ps(crow + 8 * v, mask[v]));
        }
        _mm256_maskstore_ps(crow + 8 * v, mask[v], out);
      }
    }
  }
}

template <int R>
SEMGAN_AVX2 void row_block(int n, int k, const float* a, int lda,
                           const float* b, int ldb, float* c, int ldc,
                           bool accumulate) {
  int j = 0;
  for (; j + 16 <= n; j += 16) {
    micro_kernel<R, 2, true>(k, a, lda, b + j, ldb, c + j, ldc, 16, accumulate);
  }
  const int rest = n - j;
  if (rest > 8) {
    micro_kernel<R, 2, false>(k, a, lda, b + j, ldb, c + j, ldc, rest,
                              accumulate);
  } else if (rest == 8) {
    micro_kernel<R, 1, true>(k, a, lda, b + j, ldb, c + j, ldc, 8, accumulate);
  } else if (rest > 0) {
    micro_kernel<R, 1, false>(k, a, lda, b + j, ldb, c + j, ldc, rest,
                              accumulate);
  }
}

// Column panels of 256 keep the active strip of B resident in L2 while all
// row blocks of A sweep over it.
constexpr int kPanel = 256;

SEMGAN_AVX2 void gemm_nn(int m, int n, int k, const float* a, int lda,
                         const float* b, int ldb, float* c, int ldc,
                         bool accumulate) {
  for (int j0 = 0; j0 < n; j0 += kPanel) {
    const int nb = n - j0 < kPanel ? n - j0 : kPanel;
    int i = 0;
    for (; i + 4 <= m; i += 4) {
      row_block<4>(nb, k, a + static_cast<std::ptrdiff_t>(i) * lda, lda, b + j0,
                   ldb, c + static_cast<std::ptrdiff_t>(i) * ldc + j0, ldc,
                   accumulate);
    }
    const float* ai = a + static_cast<std::ptrdiff_t>(i) * lda;
    float* ci = c + static_cast<std::ptrdiff_t>(i) * ldc + j0;
    switch (m - i) {
      case 3: row_block<3>(nb, k, ai, lda, b + j0, ldb, ci, ldc, accumulate); break;
      case 2: row_block<2>(nb, k, ai, lda, b + j0, ldb, ci, ldc, accumulate); break;
      case 1: row_block<1>(nb, k, ai, lda, b + j0, ldb, ci, ldc, accumulate); break;
      default: break;
    }
  }
}

// Copies the transpose of a (rows x cols, leading dim ld) into a dense
// cols x rows buffer.
void transpose_into(const float* src, int rows, int cols, int ld,
                    std::vector<float>& dst) {
  dst.resize(static_cast<std::size_t>(rows) * cols);
  constexpr int kTile = 32;
  for (int r0 = 0; r0 < rows; r0 += kTile) {
    for (int c0 = 0; c0 < cols; c0 += kTile) {
      const int r1 = r0 + kTile < rows ? r0 + kTile : rows;
      const int c1 = c0 + kTile < cols ? c0 + kTile : cols;
      for (int r = r0; r < r1; ++r) {
        for (int cc = c0; cc < c1; ++cc) {
          dst[static_cast<std::size_t>(cc) * rows + r] =
              src[static_cast<std::ptrdiff_t>(r) * ld + cc];
        }
      }
    }
  }
}

}  // namespace

bool cpu_supported() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

void gemm(const GemmArgs& args, const float* a, const float* b, float* c) {
  if (args.m <= 0 || args.n <= 0) return;
  if (args.k <= 0) {
    if (!args.accumulate) {
      for (int i = 0; i < args.m; ++i)
        for (int j = 0; j < args.n; ++j)
          c[static_cast<std::ptrdiff_t>(i) * args.ldc + j] = 0.0f;
    }
    return;
  }
  thread_local std::vector<float> pack_a;
  thread_local std::vector<float> pack_b;
  const float* ap = a;
  int lda = args.lda;
  if (args.trans_a == Trans::kYes) {
    transpose_into(a, args.k, args.m, args.lda, pack_a);
    ap = pack_a.data();
    lda = args.k;
  }
  const float* bp = b;
  int ldb = args.ldb;
  if (args.trans_b == Trans::kYes) {
    transpose_into(b, args.n, args.k, args.ldb, pack_b);
    bp = pack_b.data();
    ldb = args.n;
  }
  gemm_nn(args.m, args.n, args.k, ap, lda, bp, ldb, c, args.ldc,
          args.accumulate);
}

SEMGAN_AVX2 void adam_update(const AdamCoefficients& coef,
                             std::span<float> param,
                             std::span<const float> grad, std::span<float> m,
                             std::span<float> v) {
  const float b1 = static_cast<float>(coef.beta1);
  const float b2 = static_cast<float>(coef.beta2);
  const float step = static_cast<float>(coef.learning_rate / coef.bias_correction1);
  const float inv_bc2 = static_cast<float>(1.0 / coef.bias_correction2);
  const float eps = static_cast<float>(coef.epsilon);
  const __m256 vb1 = _mm256_set1_ps(b1);
  const __m256 vb1c = _mm256_set1_ps(1.0f - b1);
  const __m256 vb2 = _mm256_set1_ps(b2);
  const __m256 vb2c = _mm256_set1_ps(1.0f - b2);
  const __m256 vstep = _mm256_set1_ps(step);
  const __m256 vinv = _mm256_set1_ps(inv_bc2);
  const __m256 veps = _mm256_set1_ps(eps);
  const std::size_t size = param.size();
  std::size_t i = 0;
  for (; i + 8 <= size; i += 8) {
    const __m256 g = _mm256_loadu_ps(grad.data() + i);
    __m256 mi = _mm256_loadu_ps(m.data() + i);
    __m256 vi = _mm256_loadu_ps(v.data() + i);
    mi = _mm256_add_ps(_mm256_mul_ps(vb1, mi), _mm256_mul_ps(vb1c, g));
    vi = _mm256_add_ps(_mm256_mul_ps(vb2, vi),
                       _mm256_mul_ps(_mm256_mul_ps(vb2c, g), g));
    const __m256 denom =
        _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vi, vinv)), veps);
    const __m256 delta = _mm256_div_ps(_mm256_mul_ps(vstep, mi), denom);
    _mm256_storeu_ps(param.data() + i,
                     _mm256_sub_ps(_mm256_loadu_ps(param.data() + i), delta));
    _mm256_storeu_ps(m.data() + i, mi);
    _mm256_storeu_ps(v.data() + i, vi);
  }
  for (; i < size; ++i) {
    const float g = grad[i];
    m[i] = b1 * m[i] + (1.0f - b1) * g;
    v[i] = b2 * v[i] + (1.0f - b2) * g * g;
    param[i] -= step * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

}  // namespace semgan::kernels::avx2
