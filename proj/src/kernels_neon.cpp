// NEON variants for aarch64 (two doubles per vector). Same contract as the
// AVX2 file: identical accumulation order and no fused multiply-add, so the
// results are bit-identical to the scalar reference.

#include "kernel_table.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace dualmind::kernels::detail {
namespace {

constexpr std::size_t kLanes = 2;

void matmul_neon(double* c, const double* a, const double* b,
                 std::size_t m, std::size_t k, std::size_t n) {
    const std::size_t nvec = n / kLanes * kLanes;
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < nvec; j += kLanes) {
            float64x2_t acc = vdupq_n_f64(0.0);
            for (std::size_t l = 0; l < k; ++l) {
                const float64x2_t av = vdupq_n_f64(arow[l]);
                const float64x2_t bv = vld1q_f64(b + l * n + j);
                acc = vaddq_f64(acc, vmulq_f64(av, bv));
            }
            vst1q_f64(crow + j, acc);
        }
        for (std::size_t j = nvec; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) {
                acc += arow[l] * b[l * n + j];
            }
            crow[j] = acc;
        }
    }
}

void add_neon(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_neon(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        vst1q_f64(dst + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_neon(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        vst1q_f64(dst + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void scale_neon(double* dst, const double* a, double s, std::size_t n) {
    const float64x2_t sv = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        vst1q_f64(dst + i, vmulq_f64(sv, vld1q_f64(a + i)));
    }
    for (; i < n; ++i) dst[i] = s * a[i];
}

void axpy_neon(double* dst, double alpha, const double* x, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const float64x2_t prod = vmulq_f64(av, vld1q_f64(x + i));
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += alpha * x[i];
}

void mul_acc_neon(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const float64x2_t prod = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += a[i] * b[i];
}

void relu_neon(double* dst, const double* a, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const float64x2_t x = vld1q_f64(a + i);
        const uint64x2_t mask = vcgtq_f64(x, zero);
        vst1q_f64(dst + i, vreinterpretq_f64_u64(
                               vandq_u64(mask, vreinterpretq_u64_f64(x))));
    }
    for (; i < n; ++i) dst[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void relu_grad_neon(double* dst, const double* x, const double* dout,
                    std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const uint64x2_t mask = vcgtq_f64(vld1q_f64(x + i), zero);
        const float64x2_t masked = vreinterpretq_f64_u64(
            vandq_u64(mask, vreinterpretq_u64_f64(vld1q_f64(dout + i))));
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), masked));
    }
    for (; i < n; ++i) dst[i] += x[i] > 0.0 ? dout[i] : 0.0;
}

void adam_update_neon(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bc1, double bc2) {
    const double c1s = 1.0 - beta1;
    const double c2s = 1.0 - beta2;
    const float64x2_t b1 = vdupq_n_f64(beta1);
    const float64x2_t b2 = vdupq_n_f64(beta2);
    const float64x2_t c1 = vdupq_n_f64(c1s);
    const float64x2_t c2 = vdupq_n_f64(c2s);
    const float64x2_t lrv = vdupq_n_f64(lr);
    const float64x2_t epsv = vdupq_n_f64(eps);
    const float64x2_t bc1v = vdupq_n_f64(bc1);
    const float64x2_t bc2v = vdupq_n_f64(bc2);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const float64x2_t gv = vld1q_f64(g + i);
        float64x2_t mv = vld1q_f64(m + i);
        float64x2_t vv = vld1q_f64(v + i);
        mv = vaddq_f64(vmulq_f64(b1, mv), vmulq_f64(c1, gv));
        vv = vaddq_f64(vmulq_f64(b2, vv), vmulq_f64(c2, vmulq_f64(gv, gv)));
        vst1q_f64(m + i, mv);
        vst1q_f64(v + i, vv);
        const float64x2_t mhat = vdivq_f64(mv, bc1v);
        const float64x2_t vhat = vdivq_f64(vv, bc2v);
        const float64x2_t denom = vaddq_f64(vsqrtq_f64(vhat), epsv);
        const float64x2_t step = vmulq_f64(lrv, vdivq_f64(mhat, denom));
        vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + c1s * g[i];
        v[i] = beta2 * v[i] + c2s * (g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] = p[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace

const KernelTable* neon_table() {
    static const KernelTable table = {
        matmul_neon, add_neon,      sub_neon,  mul_neon,
        scale_neon,  axpy_neon,     mul_acc_neon, relu_neon,
        relu_grad_neon, adam_update_neon,
    };
    return &table;
}

}  // namespace dualmind::kernels::detail

#else  // not aarch64

namespace dualmind::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace dualmind::kernels::detail

#endif
