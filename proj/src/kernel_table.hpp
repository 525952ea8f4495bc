#pragma once

#include <cstddef>

// Internal dispatch table shared by the backend translation units.
namespace dualmind::kernels::detail {

struct KernelTable {
    void (*matmul)(double*, const double*, const double*,
                   std::size_t, std::size_t, std::size_t);
    void (*add)(double*, const double*, const double*, std::size_t);
    void (*sub)(double*, const double*, const double*, std::size_t);
    void (*mul)(double*, const double*, const double*, std::size_t);
    void (*scale)(double*, const double*, double, std::size_t);
    void (*axpy)(double*, double, const double*, std::size_t);
    void (*mul_acc)(double*, const double*, const double*, std::size_t);
    void (*relu)(double*, const double*, std::size_t);
    void (*relu_grad)(double*, const double*, const double*, std::size_t);
    void (*adam_update)(double*, double*, double*, const double*, std::size_t,
                        double, double, double, double, double, double);
};

const KernelTable& scalar_table();

// Return nullptr when the build or the CPU does not support the variant.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace dualmind::kernels::detail
