#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "dualmind/errors.hpp"
#include "dualmind/kernels.hpp"
#include "dualmind/rng.hpp"

using namespace dualmind;
namespace k = dualmind::kernels;

namespace {

std::vector<double> random_buf(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-3.0, 3.0);
    return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct BackendGuard {
    k::Backend saved = k::active_backend();
    ~BackendGuard() { k::set_backend(saved); }
};

const std::vector<std::size_t> kSizes{0, 1, 2, 3, 4, 5, 7, 8, 13, 64, 530, 1001};

std::vector<k::Backend> simd_backends() {
    std::vector<k::Backend> out;
    for (k::Backend b : {k::Backend::avx2, k::Backend::neon}) {
        if (k::backend_available(b)) out.push_back(b);
    }
    return out;
}

}  // namespace

TEST_CASE("scalar backend always available") {
    CHECK(k::backend_available(k::Backend::scalar));
    CHECK(k::backend_name(k::Backend::scalar) == std::string("scalar"));
}

TEST_CASE("set_backend rejects unavailable variants") {
    BackendGuard guard;
    for (k::Backend b : {k::Backend::avx2, k::Backend::neon}) {
        if (!k::backend_available(b)) {
            CHECK_THROWS_AS(k::set_backend(b), StateError);
        }
    }
}

TEST_CASE("simd elementwise kernels match scalar bit for bit") {
    BackendGuard guard;
    Rng rng(42);
    for (k::Backend backend : simd_backends()) {
        for (std::size_t n : kSizes) {
            std::vector<double> a = random_buf(rng, n);
            std::vector<double> b = random_buf(rng, n);
            if (n > 2) {
                a[1] = -0.0;  // signed-zero edge for relu
                a[2] = 0.0;
            }
            std::vector<double> acc0 = random_buf(rng, n);

            struct Case {
                std::vector<double> add, sub, mul, scale, axpy, mul_acc, relu,
                    relu_grad;
            };
            auto run = [&](k::Backend use) {
                k::set_backend(use);
                Case c;
                c.add.resize(n);
                k::add(c.add.data(), a.data(), b.data(), n);
                c.sub.resize(n);
                k::sub(c.sub.data(), a.data(), b.data(), n);
                c.mul.resize(n);
                k::mul(c.mul.data(), a.data(), b.data(), n);
                c.scale.resize(n);
                k::scale(c.scale.data(), a.data(), 1.7, n);
                c.axpy = acc0;
                k::axpy(c.axpy.data(), -0.3, b.data(), n);
                c.mul_acc = acc0;
                k::mul_acc(c.mul_acc.data(), a.data(), b.data(), n);
                c.relu.resize(n);
                k::relu(c.relu.data(), a.data(), n);
                c.relu_grad = acc0;
                k::relu_grad(c.relu_grad.data(), a.data(), b.data(), n);
                return c;
            };
            Case scalar = run(k::Backend::scalar);
            Case simd = run(backend);
            CHECK(bits_equal(scalar.add, simd.add));
            CHECK(bits_equal(scalar.sub, simd.sub));
            CHECK(bits_equal(scalar.mul, simd.mul));
            CHECK(bits_equal(scalar.scale, simd.scale));
            CHECK(bits_equal(scalar.axpy, simd.axpy));
            CHECK(bits_equal(scalar.mul_acc, simd.mul_acc));
            CHECK(bits_equal(scalar.relu, simd.relu));
            CHECK(bits_equal(scalar.relu_grad, simd.relu_grad));
        }
    }
}

TEST_CASE("simd matmul matches scalar bit for bit") {
    BackendGuard guard;
    Rng rng(7);
    for (k::Backend backend : simd_backends()) {
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t m = 1 + rng.next_u64() % 9;
            const std::size_t kk = 1 + rng.next_u64() % 17;
            const std::size_t n = 1 + rng.next_u64() % 23;
            std::vector<double> a = random_buf(rng, m * kk);
            std::vector<double> b = random_buf(rng, kk * n);
            std::vector<double> c_scalar(m * n), c_simd(m * n);
            k::set_backend(k::Backend::scalar);
            k::matmul(c_scalar.data(), a.data(), b.data(), m, kk, n);
            k::set_backend(backend);
            k::matmul(c_simd.data(), a.data(), b.data(), m, kk, n);
            CHECK(bits_equal(c_scalar, c_simd));
        }
    }
}

TEST_CASE("simd adam update matches scalar bit for bit") {
    BackendGuard guard;
    Rng rng(99);
    for (k::Backend backend : simd_backends()) {
        for (std::size_t n : {1, 3, 4, 8, 530}) {
            std::vector<double> p0 = random_buf(rng, n);
            std::vector<double> m0 = random_buf(rng, n);
            std::vector<double> v0 = random_buf(rng, n);
            for (double& x : v0) x = std::abs(x);
            std::vector<double> g = random_buf(rng, n);
            for (int t = 1; t <= 3; ++t) {
                const double bc1 = 1.0 - std::pow(0.9, t);
                const double bc2 = 1.0 - std::pow(0.999, t);
                auto ps = p0, ms = m0, vs = v0;
                k::set_backend(k::Backend::scalar);
                k::adam_update(ps.data(), ms.data(), vs.data(), g.data(), n,
                               0.01, 0.9, 0.999, 1e-8, bc1, bc2);
                auto pv = p0, mv = m0, vv = v0;
                k::set_backend(backend);
                k::adam_update(pv.data(), mv.data(), vv.data(), g.data(), n,
                               0.01, 0.9, 0.999, 1e-8, bc1, bc2);
                CHECK(bits_equal(ps, pv));
                CHECK(bits_equal(ms, mv));
                CHECK(bits_equal(vs, vv));
            }
        }
    }
}

TEST_CASE("matmul reference values") {
    std::vector<double> c(4);
    const std::vector<double> eye{1, 0, 0, 1};
    const std::vector<double> m{1, 2, 3, 4};
    k::matmul(c.data(), eye.data(), m.data(), 2, 2, 2);
    CHECK(c == m);
}
