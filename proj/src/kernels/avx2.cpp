// Built with -mavx2 -mfma. Nothing in here may run before avx2_supported()
// has confirmed the instructions exist.

#include "gph/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace gph::kernels {

namespace {

// Lanes hold two complex numbers as [re0 im0 re1 im1].
inline __m256d cmul2(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

// [w0 w0 w1 w1] from two consecutive doubles.
inline __m256d dup_pair(const double* w) {
  const __m128d pair = _mm_loadu_pd(w);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(pair), 0x50);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void caxpy_avx2(cplx* y, cplx a, const cplx* x, std::size_t n) {
  auto* yd = reinterpret_cast<double*>(y);
  const auto* xd = reinterpret_cast<const double*>(x);
  const __m256d av = _mm256_setr_pd(a.real(), a.imag(), a.real(), a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(yv, cmul2(xv, av)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_real_avx2(cplx* x, const double* w, std::size_t n) {
  auto* xd = reinterpret_cast<double*>(x);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(xd + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(xd + 2 * i), dup_pair(w + i)));
  }
  for (; i < n; ++i) x[i] = cplx(x[i].real() * w[i], x[i].imag() * w[i]);
}

double weighted_sqnorm_avx2(const cplx* x, const double* w, std::size_t n) {
  const auto* xd = reinterpret_cast<const double*>(x);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(xd + 2 * i);
    const __m256d b = _mm256_loadu_pd(xd + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(a, a), dup_pair(w + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(b, b), dup_pair(w + i + 2), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += w[i] * std::norm(x[i]);
  return acc;
}

double sqnorm_avx2(const cplx* x, std::size_t n) {
  const auto* xd = reinterpret_cast<const double*>(x);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(xd + 2 * i);
    const __m256d b = _mm256_loadu_pd(xd + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += std::norm(x[i]);
  return acc;
}

void phase_apply_avx2(cplx* out, const cplx* in, const std::int32_t* energy, const cplx* phases,
                      std::int32_t offset, std::size_t n) {
  auto* od = reinterpret_cast<double*>(out);
  const auto* id = reinterpret_cast<const double*>(in);
  const auto* pd = reinterpret_cast<const double*>(phases);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const double* p0 = pd + 2 * (energy[i] + offset);
    const double* p1 = pd + 2 * (energy[i + 1] + offset);
    const __m256d pv = _mm256_loadu2_m128d(p1, p0);
    _mm256_storeu_pd(od + 2 * i, cmul2(_mm256_loadu_pd(id + 2 * i), pv));
  }
  for (; i < n; ++i) out[i] = in[i] * phases[energy[i] + offset];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{caxpy_avx2, scale_real_avx2, weighted_sqnorm_avx2, sqnorm_avx2,
                                 phase_apply_avx2};
  return table;
}

}  // namespace gph::kernels

#else

namespace gph::kernels {
const KernelTable& avx2_table() { return scalar_table(); }
}  // namespace gph::kernels

#endif
