#include <cmath>

#include "hmlc/kernels.hpp"

namespace hmlc::kernels {

namespace {

double dot_scalar(size_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(size_t n, double a, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void relu_scalar(size_t n, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(size_t n, const double* pre, const double* gy, double* gx) {
  for (size_t i = 0; i < n; ++i) gx[i] = pre[i] > 0.0 ? gy[i] : 0.0;
}

void adam_update_scalar(size_t n, double* w, double* m, double* v, const double* g, double lr_t,
                        double b1, double b2, double eps) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    w[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {"scalar", dot_scalar,          axpy_scalar,
                          relu_scalar, relu_backward_scalar, adam_update_scalar};
  return ops;
}

}  // namespace hmlc::kernels
