#include "gph/kernels.hpp"

namespace gph::kernels {

namespace {

void caxpy_ref(cplx* y, cplx a, const cplx* x, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = cplx(y[i].real() + (ar * xr - ai * xi), y[i].imag() + (ar * xi + ai * xr));
  }
}

void scale_real_ref(cplx* x, const double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = cplx(x[i].real() * w[i], x[i].imag() * w[i]);
}

double weighted_sqnorm_ref(const cplx* x, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
  return acc;
}

double sqnorm_ref(const cplx* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return acc;
}

void phase_apply_ref(cplx* out, const cplx* in, const std::int32_t* energy, const cplx* phases,
                     std::int32_t offset, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const cplx p = phases[energy[i] + offset];
    const double ir = in[i].real(), ii = in[i].imag();
    out[i] = cplx(ir * p.real() - ii * p.imag(), ir * p.imag() + ii * p.real());
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{caxpy_ref, scale_real_ref, weighted_sqnorm_ref, sqnorm_ref, phase_apply_ref};
  return table;
}

}  // namespace gph::kernels
