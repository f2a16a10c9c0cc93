// AVX2/FMA lane. Compiled with -mavx2 -mfma; only reached after a runtime cpuid check.
#include "hmlc/kernels.hpp"

#ifdef HMLC_WITH_AVX2

#include <immintrin.h>

namespace hmlc::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double sum = hsum(acc);
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy_avx2(size_t n, double a, const double* x, double* y) {
  __m256d av = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void relu_avx2(size_t n, const double* x, double* y) {
  __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_avx2(size_t n, const double* pre, const double* gy, double* gx) {
  __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(gx + i, _mm256_and_pd(mask, _mm256_loadu_pd(gy + i)));
  }
  for (; i < n; ++i) gx[i] = pre[i] > 0.0 ? gy[i] : 0.0;
}

void adam_update_avx2(size_t n, double* w, double* m, double* v, const double* g, double lr_t,
                      double b1, double b2, double eps) {
  __m256d b1v = _mm256_set1_pd(b1), ob1 = _mm256_set1_pd(1.0 - b1);
  __m256d b2v = _mm256_set1_pd(b2), ob2 = _mm256_set1_pd(1.0 - b2);
  __m256d lrv = _mm256_set1_pd(lr_t), epsv = _mm256_set1_pd(eps);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_fmadd_pd(b1v, _mm256_loadu_pd(m + i), _mm256_mul_pd(ob1, gv));
    __m256d vv = _mm256_fmadd_pd(b2v, _mm256_loadu_pd(v + i),
                                 _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vv), epsv);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mv), denom);
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  if (i < n)
    scalar_ops().adam_update(n - i, w + i, m + i, v + i, g + i, lr_t, b1, b2, eps);
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {"avx2", dot_avx2,          axpy_avx2,
                          relu_avx2, relu_backward_avx2, adam_update_avx2};
  return ops;
}

}  // namespace hmlc::kernels

#else

namespace hmlc::kernels {

const Ops& avx2_ops() { return scalar_ops(); }

}  // namespace hmlc::kernels

#endif
