#pragma once

// Arithmetic inner loops used by the network engine.
//
// Every kernel has a portable scalar reference implementation and, where it
// pays off, an AVX2/FMA variant. The variant is chosen once at startup from
// CPUID and can be forced with the SEMGAN_KERNELS environment variable
// ("scalar" or "avx2") or with set_variant(). The scalar path is the
// reference the SIMD path is tested against.

#include <cstddef>
#include <span>
#include <string_view>

namespace semgan::kernels {

enum class Variant { kScalar, kAvx2 };

std::string_view variant_name(Variant v);
bool variant_supported(Variant v);
Variant active_variant();
// Throws std::invalid_argument when the CPU lacks the requested variant.
void set_variant(Variant v);

enum class Trans { kNo, kYes };

// Row-major C(m x n) = op(A)(m x k) * op(B)(k x n), added onto C when
// `accumulate` is set. Leading dimensions refer to the stored (untransposed)
// matrices.
struct GemmArgs {
  Trans trans_a = Trans::kNo;
  Trans trans_b = Trans::kNo;
  int m = 0, n = 0, k = 0;
  int lda = 0, ldb = 0, ldc = 0;
  bool accumulate = false;
};

void gemm(const GemmArgs& args, const float* a, const float* b, float* c);
void gemm(const GemmArgs& args, const double* a, const double* b, double* c);

// One bias-corrected Adam step over a flat parameter block.
struct AdamCoefficients {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t
};

void adam_update(const AdamCoefficients& coef, std::span<float> param,
                 std::span<const float> grad, std::span<float> m,
                 std::span<float> v);
void adam_update(const AdamCoefficients& coef, std::span<double> param,
                 std::span<const double> grad, std::span<double> m,
                 std::span<double> v);

// Per-variant entry points, exposed for equivalence testing.
namespace scalar {
template <typename T>
void gemm(const GemmArgs& args, const T* a, const T* b, T* c);
template <typename T>
void adam_update(const AdamCoefficients& coef, std::span<T> param,
                 std::span<const T> grad, std::span<T> m, std::span<T> v);
}  // namespace scalar

namespace avx2 {
bool cpu_supported();
void gemm(const GemmArgs& args, const float* a, const float* b, float* c);
void adam_update(const AdamCoefficients& coef, std::span<float> param,
                 std::span<const float> grad, std::span<float> m,
                 std::span<float> v);
}  // namespace avx2

}  // namespace semgan::kernels
