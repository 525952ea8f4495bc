#include "dualmind/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

#include "dualmind/errors.hpp"
#include "kernel_table.hpp"

namespace dualmind::kernels {
namespace {

using detail::KernelTable;

struct Dispatch {
    const KernelTable* table;
    Backend backend;
};

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::scalar: return &detail::scalar_table();
        case Backend::avx2: return detail::avx2_table();
        case Backend::neon: return detail::neon_table();
    }
    return nullptr;
}

Dispatch detect() {
    if (const char* env = std::getenv("DUALMIND_KERNELS")) {
        Backend want = Backend::scalar;
        bool known = true;
        if (std::strcmp(env, "scalar") == 0) want = Backend::scalar;
        else if (std::strcmp(env, "avx2") == 0) want = Backend::avx2;
        else if (std::strcmp(env, "neon") == 0) want = Backend::neon;
        else known = false;
        if (known) {
            if (const KernelTable* t = table_for(want)) return {t, want};
            std::cerr << "dualmind: DUALMIND_KERNELS=" << env
                      << " unavailable on this machine, using default\n";
        } else {
            std::cerr << "dualmind: unknown DUALMIND_KERNELS value '" << env
                      << "', using default\n";
        }
    }
    if (const KernelTable* t = detail::avx2_table()) return {t, Backend::avx2};
    if (const KernelTable* t = detail::neon_table()) return {t, Backend::neon};
    return {&detail::scalar_table(), Backend::scalar};
}

Dispatch& active() {
    static Dispatch d = detect();
    return d;
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

bool backend_available(Backend b) { return table_for(b) != nullptr; }

Backend active_backend() { return active().backend; }

void set_backend(Backend b) {
    const KernelTable* t = table_for(b);
    if (!t) {
        throw StateError(std::string("kernel backend unavailable: ") +
                         backend_name(b));
    }
    active() = {t, b};
}

void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n) {
    active().table->matmul(c, a, b, m, k, n);
}

void add(double* dst, const double* a, const double* b, std::size_t n) {
    active().table->add(dst, a, b, n);
}

void sub(double* dst, const double* a, const double* b, std::size_t n) {
    active().table->sub(dst, a, b, n);
}

void mul(double* dst, const double* a, const double* b, std::size_t n) {
    active().table->mul(dst, a, b, n);
}

void scale(double* dst, const double* a, double s, std::size_t n) {
    active().table->scale(dst, a, s, n);
}

void axpy(double* dst, double alpha, const double* x, std::size_t n) {
    active().table->axpy(dst, alpha, x, n);
}

void mul_acc(double* dst, const double* a, const double* b, std::size_t n) {
    active().table->mul_acc(dst, a, b, n);
}

void relu(double* dst, const double* a, std::size_t n) {
    active().table->relu(dst, a, n);
}

void relu_grad(double* dst, const double* x, const double* dout, std::size_t n) {
    active().table->relu_grad(dst, x, dout, n);
}

void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2) {
    active().table->adam_update(p, m, v, g, n, lr, beta1, beta2, eps, bc1, bc2);
}

}  // namespace dualmind::kernels
