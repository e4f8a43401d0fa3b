#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the tensor, dynamics and NLS code.
//
// Every kernel has a scalar reference implementation and an AVX2/FMA variant
// compiled in its own translation unit. The variant is picked once at startup
// from CPUID; GPH_SIMD=scalar forces the reference path.

namespace gph::kernels {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

struct KernelTable {
  /// y[i] += a * x[i]
  void (*caxpy)(cplx* y, cplx a, const cplx* x, std::size_t n);
  /// x[i] *= w[i]
  void (*scale_real)(cplx* x, const double* w, std::size_t n);
  /// sum_i w[i] * |x[i]|^2
  double (*weighted_sqnorm)(const cplx* x, const double* w, std::size_t n);
  /// sum_i |x[i]|^2
  double (*sqnorm)(const cplx* x, std::size_t n);
  /// out[i] = in[i] * phases[energy[i] + offset]
  void (*phase_apply)(cplx* out, const cplx* in, const std::int32_t* energy, const cplx* phases,
                      std::int32_t offset, std::size_t n);
};

const KernelTable& scalar_table();
const KernelTable& avx2_table();

bool avx2_supported();
Backend active_backend();
/// Throws std::runtime_error when the requested backend is unavailable on this CPU.
void set_backend(Backend backend);
std::string_view backend_name(Backend backend);

const KernelTable& active();

inline void caxpy(std::span<cplx> y, cplx a, std::span<const cplx> x) {
  active().caxpy(y.data(), a, x.data(), y.size());
}
inline void scale_real(std::span<cplx> x, std::span<const double> w) {
  active().scale_real(x.data(), w.data(), x.size());
}
inline double weighted_sqnorm(std::span<const cplx> x, std::span<const double> w) {
  return active().weighted_sqnorm(x.data(), w.data(), x.size());
}
inline double sqnorm(std::span<const cplx> x) { return active().sqnorm(x.data(), x.size()); }
inline void phase_apply(std::span<cplx> out, std::span<const cplx> in, std::span<const std::int32_t> energy,
                        const cplx* phases, std::int32_t offset) {
  active().phase_apply(out.data(), in.data(), energy.data(), phases, offset, out.size());
}

}  // namespace gph::kernels
