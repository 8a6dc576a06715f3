#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "semgan/kernels.hpp"

namespace semgan::kernels {
namespace {

Variant detect() {
  if (const char* forced = std::getenv("SEMGAN_KERNELS")) {
    const std::string name(forced);
    if (name == "scalar") return Variant::kScalar;
    if (name == "avx2" && avx2::cpu_supported()) return Variant::kAvx2;
  }
  return avx2::cpu_supported() ? Variant::kAvx2 : Variant::kScalar;
}

std::atomic<Variant>& current() {
  static std::atomic<Variant> variant{detect()};
  return variant;
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kScalar: return "scalar";
    case Variant::kAvx2: return "avx2";
  }
  return "unknown";
}

bool variant_supported(Variant v) {
  return v == Variant::kScalar || avx2::cpu_supported();
}

Variant active_variant() { return current().load(std::memory_order_relaxed); }

void set_variant(Variant v) {
  if (!variant_supported(v)) {
    throw std::invalid_argument("kernel variant not supported on this CPU: " +
                                std::string(variant_name(v)));
  }
  current().store(v, std::memory_order_relaxed);
}

void gemm(const GemmArgs& args, const float* a, const float* b, float* c) {
  if (active_variant() == Variant::kAvx2) {
    avx2::gemm(args, a, b, c);
  } else {
    scalar::gemm(args, a, b, c);
  }
}

// Double precision is only used for gradient verification on tiny models;
// the scalar reference is the sole implementation.
void gemm(const GemmArgs& args, const double* a, const double* b, double* c) {
  scalar::gemm(args, a, b, c);
}

void adam_update(const AdamCoefficients& coef, std::span<float> param,
                 std::span<const float> grad, std::span<float> m,
                 std::span<float> v) {
  if (active_variant() == Variant::kAvx2) {
    avx2::adam_update(coef, param, grad, m, v);
  } else {
    scalar::adam_update(coef, param, grad, m, v);
  }
}

void adam_update(const AdamCoefficients& coef, std::span<double> param,
                 std::span<const double> grad, std::span<double> m,
                 std::span<double> v) {
  scalar::adam_update(coef, param, grad, m, v);
}

}  // namespace semgan::kernels
