#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gph/kernels.hpp"

namespace gph::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported;
#else
  return false;
#endif
}

namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("GPH_SIMD")) {
    if (std::string(env) == "scalar") return Backend::scalar;
  }
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (backend == Backend::avx2 && !avx2_supported()) {
    throw std::runtime_error("AVX2/FMA kernels requested but not supported by this CPU");
  }
  current().store(backend, std::memory_order_relaxed);
}

std::string_view backend_name(Backend backend) { return backend == Backend::avx2 ? "avx2" : "scalar"; }

const KernelTable& active() {
  return active_backend() == Backend::avx2 ? avx2_table() : scalar_table();
}

}  // namespace gph::kernels
