#pragma once

#include <cstddef>

// Data-parallel inner loops used by the trainer. Scalar reference kernels plus an
// AVX2/FMA lane selected at runtime; both lanes are equivalence-tested. Lane choice
// can be forced with HMLC_SIMD=scalar|avx2|auto (checked once, at first use).
namespace hmlc::kernels {

struct Ops {
  const char* name;
  double (*dot)(size_t n, const double* x, const double* y);
  // y += a * x
  void (*axpy)(size_t n, double a, const double* x, double* y);
  // y = max(x, 0)
  void (*relu)(size_t n, const double* x, double* y);
  // gx = gy where pre > 0, else 0
  void (*relu_backward)(size_t n, const double* pre, const double* gy, double* gx);
  // Adam step with bias-corrected rate folded into lr_t:
  //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2;  w -= lr_t * m / (sqrt(v) + eps)
  void (*adam_update)(size_t n, double* w, double* m, double* v, const double* g, double lr_t,
                      double b1, double b2, double eps);
};

const Ops& scalar_ops();
bool have_avx2();             // compiled in and supported by this CPU
const Ops& avx2_ops();        // valid only when have_avx2()
const Ops& active();          // resolved once per process

inline double dot(size_t n, const double* x, const double* y) { return active().dot(n, x, y); }
inline void axpy(size_t n, double a, const double* x, double* y) { active().axpy(n, a, x, y); }
inline void relu(size_t n, const double* x, double* y) { active().relu(n, x, y); }
inline void relu_backward(size_t n, const double* pre, const double* gy, double* gx) {
  active().relu_backward(n, pre, gy, gx);
}
inline void adam_update(size_t n, double* w, double* m, double* v, const double* g, double lr_t,
                        double b1, double b2, double eps) {
  active().adam_update(n, w, m, v, g, lr_t, b1, b2, eps);
}

}  // namespace hmlc::kernels
