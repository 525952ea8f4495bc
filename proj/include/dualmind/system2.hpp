#pragma once

#include "dualmind/rng.hpp"
#include "dualmind/scenario.hpp"
#include "dualmind/system1.hpp"
#include "dualmind/tensor.hpp"

namespace dualmind {

/// Deliberative pathway: an MLP mapping (System-1 logits, flattened System-1
/// parameters, context) to an additive parameter delta of length P.
///
/// The final layer starts at exact zero, so a fresh controller is the
/// identity: the adapted forward reproduces System 1 until training moves it.
/// The first-layer rows for the load and frame context slots also start at
/// zero; the frame row additionally never receives updates (see
/// frame_row_grad_mask), which keeps the delta a function of facts alone —
/// presentation frame can only act through the gate.
struct ControllerParams {
    Tensor w1;  // (2 + P + 5) x hidden
    Tensor b1;  // hidden
    Tensor w2;  // hidden x P
    Tensor b2;  // P

    std::size_t input_dim() const { return w1.shape()[0]; }
    std::size_t output_dim() const { return w2.shape()[1]; }

    std::vector<Tensor> tensors() { return {w1, b1, w2, b2}; }
};

inline constexpr std::size_t kControllerHidden = 64;

ControllerParams init_controller(std::size_t param_dim, Rng& rng,
                                 std::size_t hidden = kControllerHidden);

/// Delta = MLP(y1 ++ theta_flat ++ [env, load, frame]).
Tensor controller_delta(Tape& tape, const Tensor& y1, const Tensor& theta_flat,
                        const Context& context, const ControllerParams& phi);

/// Zero the gradient entries of the first-layer frame row, keeping that row
/// frozen at its zero initialization across optimizer steps.
void mask_frame_row_grad(ControllerParams& phi);

/// Functional parameter injection: run System 1 with theta_flat + delta. The
/// stored parameters are untouched; gradients flow through delta only (the
/// flat base is a constant once System 1 is frozen).
Tensor adapted_forward(Tape& tape, const ScenarioGraph& graph, NodeKind agent,
                       const Tensor& theta_flat, const Tensor& delta,
                       const DimsConfig& dims,
                       const std::vector<NodeKind>& agents);

}  // namespace dualmind
