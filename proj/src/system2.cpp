#include "dualmind/system2.hpp"

#include <cmath>

#include "dualmind/errors.hpp"

namespace dualmind {

namespace {
// Context slots appended after y1 (2) and theta_flat (P).
constexpr std::size_t kContextDim = 5;
constexpr std::size_t kLoadSlot = 3;
constexpr std::size_t kFrameSlot = 4;
}  // namespace

ControllerParams init_controller(std::size_t param_dim, Rng& rng,
                                 std::size_t hidden) {
    const std::size_t in_dim = 2 + param_dim + kContextDim;
    // Per-group fan-in: the flat parameter block is two orders of magnitude
    // wider than the logits and cue groups, and a single global fan-in
    // leaves the cues without influence on the hidden layer. Cue rows get an
    // extra factor so cue conjunctions are expressible from the start.
    const double theta_bound = 1.0 / std::sqrt(static_cast<double>(param_dim));
    const double y1_bound = 1.0 / std::sqrt(2.0);
    const double ctx_bound = 2.0 / std::sqrt(static_cast<double>(kContextDim));
    std::vector<double> w1(in_dim * hidden);
    for (std::size_t row = 0; row < in_dim; ++row) {
        const double bound = row < 2 ? y1_bound
                             : row < 2 + param_dim ? theta_bound
                                                   : ctx_bound;
        for (std::size_t j = 0; j < hidden; ++j) {
            w1[row * hidden + j] = rng.uniform(-bound, bound);
        }
    }
    std::vector<double> b1(hidden);
    for (double& x : b1) {
        x = rng.uniform(-theta_bound, theta_bound);
    }
    // Load and frame rows start inert; training with varying load can move
    // the load row, the frame row stays masked.
    for (std::size_t slot : {kLoadSlot, kFrameSlot}) {
        const std::size_t row = 2 + param_dim + slot;
        for (std::size_t j = 0; j < hidden; ++j) w1[row * hidden + j] = 0.0;
    }
    ControllerParams phi;
    phi.w1 = Tensor::matrix(in_dim, hidden, std::move(w1));
    phi.b1 = Tensor::vector(std::move(b1));
    phi.w2 = Tensor::zeros({hidden, param_dim});
    phi.b2 = Tensor::zeros({param_dim});
    for (Tensor t : phi.tensors()) t.set_requires_grad(true);
    return phi;
}

Tensor controller_delta(Tape& tape, const Tensor& y1, const Tensor& theta_flat,
                        const Context& context, const ControllerParams& phi) {
    if (y1.rank() != 1 || theta_flat.rank() != 1) {
        throw ShapeError("controller: vector inputs required");
    }
    const std::size_t expect = 2 + theta_flat.numel() + kContextDim;
    if (y1.numel() != 2 || phi.input_dim() != expect ||
        phi.output_dim() != theta_flat.numel()) {
        throw ShapeError("controller: dimensions disagree (input " +
                         std::to_string(expect) + " vs " +
                         std::to_string(phi.input_dim()) + ", output " +
                         std::to_string(theta_flat.numel()) + " vs " +
                         std::to_string(phi.output_dim()) + ")");
    }
    Tensor ctx = Tensor::vector(context_vector(context));
    Tensor x = tape.concat(tape.concat(y1, theta_flat), ctx);
    Tensor hidden = tape.relu(tape.add(tape.matmul(x, phi.w1), phi.b1));
    return tape.add(tape.matmul(hidden, phi.w2), phi.b2);
}

void mask_frame_row_grad(ControllerParams& phi) {
    if (!phi.w1.grad_present()) return;
    const std::size_t hidden = phi.w1.shape()[1];
    const std::size_t row = phi.input_dim() - kContextDim + kFrameSlot;
    auto g = phi.w1.grad_mut();
    for (std::size_t j = 0; j < hidden; ++j) g[row * hidden + j] = 0.0;
}

Tensor adapted_forward(Tape& tape, const ScenarioGraph& graph, NodeKind agent,
                       const Tensor& theta_flat, const Tensor& delta,
                       const DimsConfig& dims,
                       const std::vector<NodeKind>& agents) {
    if (theta_flat.numel() != delta.numel()) {
        throw ShapeError("adapted_forward: theta has " +
                         std::to_string(theta_flat.numel()) +
                         " entries, delta " + std::to_string(delta.numel()));
    }
    Tensor adapted = tape.add(theta_flat, delta);
    System1Params injected = unflatten_on_tape(tape, adapted, dims, agents);
    return forward_system1(tape, graph, agent, injected);
}

}  // namespace dualmind
