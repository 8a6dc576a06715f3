#include <cmath>

#include "semgan/kernels.hpp"

namespace semgan::kernels::scalar {

template <typename T>
void gemm(const GemmArgs& args, const T* a, const T* b, T* c) {
  const bool ta = args.trans_a == Trans::kYes;
  const bool tb = args.trans_b == Trans::kYes;
  for (int i = 0; i < args.m; ++i) {
    T* crow = c + static_cast<std::ptrdiff_t>(i) * args.ldc;
    if (!args.accumulate) {
      for (int j = 0; j < args.n; ++j) crow[j] = T{0};
    }
    for (int p = 0; p < args.k; ++p) {
      const T av = ta ? a[static_cast<std::ptrdiff_t>(p) * args.lda + i]
                      : a[static_cast<std::ptrdiff_t>(i) * args.lda + p];
      if (tb) {
        for (int j = 0; j < args.n; ++j) {
          crow[j] += av * b[static_cast<std::ptrdiff_t>(j) * args.ldb + p];
        }
      } else {
        const T* brow = b + static_cast<std::ptrdiff_t>(p) * args.ldb;
        for (int j = 0; j < args.n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

template <typename T>
void adam_update(const AdamCoefficients& coef, std::span<T> param,
                 std::span<const T> grad, std::span<T> m, std::span<T> v) {
  const T b1 = static_cast<T>(coef.beta1);
  const T b2 = static_cast<T>(coef.beta2);
  const T step = static_cast<T>(coef.learning_rate / coef.bias_correction1);
  const T inv_bc2 = static_cast<T>(1.0 / coef.bias_correction2);
  const T eps = static_cast<T>(coef.epsilon);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    m[i] = b1 * m[i] + (T{1} - b1) * g;
    v[i] = b2 * v[i] + (T{1} - b2) * g * g;
    param[i] -= step * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

template void gemm<float>(const GemmArgs&, const float*, const float*, float*);
template void gemm<double>(const GemmArgs&, const double*, const double*,
                           double*);
template void adam_update<float>(const AdamCoefficients&, std::span<float>,
                                 std::span<const float>, std::span<float>,
                                 std::span<float>);
template void adam_update<double>(const AdamCoefficients&, std::span<double>,
                                  std::span<const double>, std::span<double>,
                                  std::span<double>);

}  // namespace semgan::kernels::scalar
