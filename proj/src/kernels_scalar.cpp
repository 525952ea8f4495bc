// Scalar reference kernels. These define the canonical result bit-for-bit;
// the SIMD variants must reproduce them exactly (same accumulation order,
// plain mul+add, no FMA).

#include <cmath>
#include <cstddef>

#include "kernel_table.hpp"

namespace dualmind::kernels::detail {
namespace {

void matmul_scalar(double* c, const double* a, const double* b,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) {
                acc += arow[l] * b[l * n + j];
            }
            c[i * n + j] = acc;
        }
    }
}

void add_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_scalar_(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void scale_scalar(double* dst, const double* a, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = s * a[i];
}

void axpy_scalar(double* dst, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += alpha * x[i];
}

void mul_acc_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += a[i] * b[i];
}

void relu_scalar(double* dst, const double* a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void relu_grad_scalar(double* dst, const double* x, const double* dout,
                      std::size_t n) {
    // Unconditional add of a masked value, so the SIMD mask+add form matches.
    for (std::size_t i = 0; i < n; ++i) dst[i] += x[i] > 0.0 ? dout[i] : 0.0;
}

void adam_update_scalar(double* p, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bc1, double bc2) {
    const double c1 = 1.0 - beta1;
    const double c2 = 1.0 - beta2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + c1 * g[i];
        v[i] = beta2 * v[i] + c2 * (g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] = p[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table = {
        matmul_scalar, add_scalar,      sub_scalar,  mul_scalar_,
        scale_scalar,  axpy_scalar,     mul_acc_scalar, relu_scalar,
        relu_grad_scalar, adam_update_scalar,
    };
    return table;
}

}  // namespace dualmind::kernels::detail
