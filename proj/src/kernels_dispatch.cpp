#include "dbb84/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace dbb84::kernels {

bool avx2_supported() {
#if defined(DBB84_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#if !defined(DBB84_HAVE_AVX2)
const Ops& avx2() { return scalar(); }
#endif

const Ops& active() {
  static const Ops* resolved = [] {
    if (const char* env = std::getenv("DBB84_SIMD")) {
      if (std::strcmp(env, "scalar") == 0) return &scalar();
      if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return &avx2();
    }
    return avx2_supported() ? &avx2() : &scalar();
  }();
  return *resolved;
}

}  // namespace dbb84::kernels
