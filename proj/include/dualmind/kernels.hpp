#pragma once

#include <cstddef>

namespace dualmind::kernels {

/// Numeric inner loops behind the tensor engine. Every kernel has a scalar
/// reference implementation plus SIMD variants (AVX2 on x86-64, NEON on
/// aarch64) selected once at startup. The SIMD variants preserve the scalar
/// accumulation order and avoid FMA contraction, so all backends produce
/// bit-identical results; the equivalence suite asserts exactly that.
enum class Backend {
    scalar,
    avx2,
    neon,
};

const char* backend_name(Backend b);
bool backend_available(Backend b);

/// Currently active backend (best available unless overridden).
Backend active_backend();

/// Force a backend. Throws StateError if it is not available on this machine.
/// The environment variable DUALMIND_KERNELS=scalar|avx2|neon does the same
/// at startup and falls back silently when unavailable.
void set_backend(Backend b);

// c[m x n] = a[m x k] * b[k x n], row-major, c overwritten.
void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n);

void add(double* dst, const double* a, const double* b, std::size_t n);
void sub(double* dst, const double* a, const double* b, std::size_t n);
void mul(double* dst, const double* a, const double* b, std::size_t n);

// dst = s * a
void scale(double* dst, const double* a, double s, std::size_t n);

// dst += alpha * x
void axpy(double* dst, double alpha, const double* x, std::size_t n);

// dst += a * b (elementwise)
void mul_acc(double* dst, const double* a, const double* b, std::size_t n);

// dst = max(a, 0), with the subgradient convention relu'(0) = 0
void relu(double* dst, const double* a, std::size_t n);

// dst += (x > 0) ? dout : 0
void relu_grad(double* dst, const double* x, const double* dout, std::size_t n);

// In-place Adam update with precomputed bias corrections
// bc1 = 1 - beta1^t, bc2 = 1 - beta2^t.
void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2);

}  // namespace dualmind::kernels
