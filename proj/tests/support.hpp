#pragma once

// Test-side oracles: central finite differences against reverse-mode
// gradients, plus a generator of random small networks that exercises every
// tape operation. Nothing here touches the backward implementations it
// checks.

#include <cmath>
#include <functional>
#include <vector>

#include "dualmind/rng.hpp"
#include "dualmind/tensor.hpp"

namespace testsupport {

using dualmind::Rng;
using dualmind::Tape;
using dualmind::Tensor;

inline constexpr double kFdStep = 1e-5;

/// Relative error |a - b| / max(1, |a|, |b|).
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Max relative error between reverse-mode gradients of `build` and central
/// finite differences over every element of every parameter. `build` must
/// re-run the forward pass from the parameters' current values.
inline double gradcheck(std::vector<Tensor>& params,
                        const std::function<Tensor(Tape&)>& build,
                        double h = kFdStep) {
    for (Tensor& p : params) p.zero_grad();
    {
        Tape tape;
        Tensor loss = build(tape);
        tape.backward(loss);
    }
    auto eval = [&build]() {
        Tape tape;
        return build(tape).item();
    };
    double worst = 0.0;
    for (Tensor& p : params) {
        auto values = p.values_mut();
        const auto grads = p.grad();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + h;
            const double up = eval();
            values[i] = saved - h;
            const double down = eval();
            values[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            worst = std::max(worst, rel_err(grads[i], fd));
        }
    }
    return worst;
}

/// A randomized network touching matmul (both vector and matrix forms), all
/// elementwise ops, concat/row/slice/reshape, softmax, cross-entropy, sum
/// and scalar blending. Instances cycle through the activations and the two
/// loss routes, so a batch of them covers the whole op set.
struct RandomNet {
    std::vector<Tensor> params;
    std::function<Tensor(Tape&)> build;
};

inline RandomNet make_random_net(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n_in = 2 + static_cast<std::size_t>(rng.next_u64() % 4);
    const std::size_t n_h = 2 + static_cast<std::size_t>(rng.next_u64() % 5);
    const std::size_t n_out = 2 + static_cast<std::size_t>(rng.next_u64() % 3);
    const int activation = static_cast<int>(rng.next_u64() % 3);
    const bool softmax_route = rng.next_u64() % 2 == 0;
    const std::size_t target = rng.next_u64() % n_out;

    auto rand_vec = [&rng](std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
        return v;
    };

    Tensor x = Tensor::vector(rand_vec(n_in));
    Tensor w1 = Tensor::matrix(n_in, n_h, rand_vec(n_in * n_h));
    Tensor b1 = Tensor::vector(rand_vec(n_h));
    Tensor u = Tensor::vector(rand_vec(n_h));
    Tensor s = Tensor::scalar(0.5 + rng.uniform(0.0, 1.0));
    Tensor w2 = Tensor::matrix(n_h, n_out, rand_vec(n_h * n_out));
    Tensor b2 = Tensor::vector(rand_vec(n_out));
    Tensor a = Tensor::matrix(2, 3, rand_vec(6));
    Tensor b = Tensor::matrix(3, 2, rand_vec(6));

    RandomNet net;
    net.params = {w1, b1, u, s, w2, b2, a, b};
    for (Tensor& p : net.params) p.set_requires_grad(true);

    net.build = [=](Tape& tape) -> Tensor {
        Tensor pre = tape.add(tape.matmul(x, w1), b1);
        Tensor h = activation == 0   ? tape.relu(pre)
                   : activation == 1 ? tape.sigmoid(pre)
                                     : tape.tanh(pre);
        Tensor h2 = tape.mul(h, u);
        Tensor h3 = tape.sub(h2, tape.scale(u, 0.3));
        Tensor h4 = tape.mul_scalar(h3, s);
        Tensor logits = tape.add(tape.matmul(h4, w2), b2);

        Tensor loss = tape.cross_entropy(logits, target);
        if (softmax_route) {
            Tensor p = tape.softmax(logits);
            loss = tape.add(loss, tape.scale(tape.sum(tape.mul(p, p)), 0.5));
        }
        Tensor mix = tape.concat(tape.slice(h, 0, 1), tape.row(w1, 0));
        loss = tape.add(loss, tape.scale(tape.sum(tape.tanh(mix)), 0.05));
        Tensor mm = tape.matmul(a, tape.reshape(tape.reshape(b, {6}), {3, 2}));
        loss = tape.add(loss, tape.scale(tape.sum(mm), 0.02));
        return loss;
    };
    return net;
}

}  // namespace testsupport
