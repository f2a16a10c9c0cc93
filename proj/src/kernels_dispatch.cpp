#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hmlc/kernels.hpp"

namespace hmlc::kernels {

bool have_avx2() {
#ifdef HMLC_WITH_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const Ops& resolve() {
  const char* env = std::getenv("HMLC_SIMD");
  std::string mode = env ? env : "auto";
  if (mode == "scalar") return scalar_ops();
  if (mode == "avx2") {
    if (!have_avx2()) throw std::runtime_error("HMLC_SIMD=avx2 but CPU/build lacks AVX2+FMA");
    return avx2_ops();
  }
  if (mode != "auto" && mode != "")
    throw std::runtime_error("HMLC_SIMD must be auto, scalar or avx2 (got '" + mode + "')");
  return have_avx2() ? avx2_ops() : scalar_ops();
}

}  // namespace

const Ops& active() {
  static const Ops& ops = resolve();
  return ops;
}

}  // namespace hmlc::kernels
