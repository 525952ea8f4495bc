#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dualmind/rng.hpp"
#include "dualmind/scenario.hpp"
#include "dualmind/tensor.hpp"

namespace dualmind {

struct DimsConfig {
    std::size_t feature_dim = 6;
    std::size_t hidden_dim = 16;
    std::size_t meta_dim = 8;
    std::size_t head_hidden = 16;
    std::size_t num_classes = 2;
};

/// Habitual pathway parameters: one graph-convolution weight, a two-layer
/// head, and one meta-vector per agent (roster order fixes the flattening).
struct System1Params {
    Tensor w_gcn;     // feature_dim x hidden_dim
    Tensor w_head1;   // (hidden_dim + meta_dim) x head_hidden
    Tensor b_head1;   // head_hidden
    Tensor w_head2;   // head_hidden x num_classes
    Tensor b_head2;   // num_classes
    std::vector<std::pair<NodeKind, Tensor>> meta;

    const Tensor& meta_for(NodeKind agent) const;
    Tensor& meta_for(NodeKind agent);

    /// All tensors in flattening order (weights first, meta last).
    std::vector<Tensor> tensors();
};

/// Total flat parameter count for a roster of the given size.
std::size_t param_count(const DimsConfig& dims, std::size_t num_agents);

/// Weights uniform in (-1/sqrt(fan_in), +1/sqrt(fan_in)) per layer (biases
/// included), meta-vectors normal(0, 0.1). Draw order is fixed so a seed
/// pins the parameters bit-exactly.
System1Params init_system1(const DimsConfig& dims,
                           const std::vector<NodeKind>& agents, Rng& rng);

/// Belief logits for one queried agent:
/// head(relu(A_norm X W)[agent] ++ meta[agent]).
Tensor forward_system1(Tape& tape, const ScenarioGraph& graph, NodeKind agent,
                       const System1Params& params);

/// Deterministic concatenation: W_gcn row-major, head layer 1 weights, layer
/// 1 bias, layer 2 weights, layer 2 bias, then meta-vectors in roster order.
std::vector<double> flatten_params(const System1Params& params);

/// Exact inverse of flatten_params; ShapeError on a length mismatch.
System1Params unflatten_params(std::span<const double> flat,
                               const DimsConfig& dims,
                               const std::vector<NodeKind>& agents);

/// Same split, but recorded on the tape so gradients flow from the produced
/// parameter views back into the flat vector.
System1Params unflatten_on_tape(Tape& tape, const Tensor& flat,
                                const DimsConfig& dims,
                                const std::vector<NodeKind>& agents);

}  // namespace dualmind
