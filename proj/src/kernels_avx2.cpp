// AVX2 variants. Four doubles per vector, unaligned loads, explicit
// mul-then-add (never FMA) so results match the scalar reference bit for bit.
// The matmul vectorizes across output columns; each output element still
// accumulates over k in ascending order, exactly like the scalar loop.

#include "kernel_table.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace dualmind::kernels::detail {
namespace {

constexpr std::size_t kLanes = 4;

void matmul_avx2(double* c, const double* a, const double* b,
                 std::size_t m, std::size_t k, std::size_t n) {
    const std::size_t nvec = n / kLanes * kLanes;
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < nvec; j += kLanes) {
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t l = 0; l < k; ++l) {
                const __m256d av = _mm256_set1_pd(arow[l]);
                const __m256d bv = _mm256_loadu_pd(b + l * n + j);
                acc = _mm256_add_pd(acc, _mm256_mul_pd(av, bv));
            }
            _mm256_storeu_pd(crow + j, acc);
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

void add_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void scale_avx2(double* dst, const double* a, double s, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(sv, _mm256_loadu_pd(a + i)));
    }
    for (; i < n; ++i) dst[i] = s * a[i];
}

void axpy_avx2(double* dst, double alpha, const double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += alpha * x[i];
}

void mul_acc_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                           _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += a[i] * b[i];
}

void relu_avx2(double* dst, const double* a, std::size_t n) {
    // cmp+and instead of max so relu(-0.0) == +0.0 like the scalar branch.
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d x = _mm256_loadu_pd(a + i);
        const __m256d mask = _mm256_cmp_pd(x, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dst + i, _mm256_and_pd(mask, x));
    }
    for (; i < n; ++i) dst[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void relu_grad_avx2(double* dst, const double* x, const double* dout,
                    std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        const __m256d masked = _mm256_and_pd(mask, _mm256_loadu_pd(dout + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), masked));
    }
    for (; i < n; ++i) dst[i] += x[i] > 0.0 ? dout[i] : 0.0;
}

void adam_update_avx2(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bc1, double bc2) {
    const double c1s = 1.0 - beta1;
    const double c2s = 1.0 - beta2;
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d c1 = _mm256_set1_pd(c1s);
    const __m256d c2 = _mm256_set1_pd(c2s);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    const __m256d bc1v = _mm256_set1_pd(bc1);
    const __m256d bc2v = _mm256_set1_pd(bc2);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_add_pd(_mm256_mul_pd(b1, mv), _mm256_mul_pd(c1, gv));
        vv = _mm256_add_pd(_mm256_mul_pd(b2, vv),
                           _mm256_mul_pd(c2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(mv, bc1v);
        const __m256d vhat = _mm256_div_pd(vv, bc2v);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        const __m256d step = _mm256_mul_pd(lrv, _mm256_div_pd(mhat, denom));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + c1s * g[i];
        v[i] = beta2 * v[i] + c2s * (g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] = p[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

}  // namespace

const KernelTable* avx2_table() {
    if (!cpu_has_avx2()) return nullptr;
    static const KernelTable table = {
        matmul_avx2, add_avx2,      sub_avx2,  mul_avx2,
        scale_avx2,  axpy_avx2,     mul_acc_avx2, relu_avx2,
        relu_grad_avx2, adam_update_avx2,
    };
    return &table;
}

}  // namespace dualmind::kernels::detail

#else  // not x86-64

namespace dualmind::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace dualmind::kernels::detail

#endif
