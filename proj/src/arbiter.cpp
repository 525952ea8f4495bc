#include "dualmind/arbiter.hpp"

#include <cmath>

#include "dualmind/errors.hpp"
#include "dualmind/rng.hpp"

namespace dualmind {

GateParams init_gate(Rng& rng, std::size_t hidden) {
    constexpr std::size_t kIn = 4;  // env (3) + frame (1)
    auto fill = [&rng](Shape shape, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::vector<double> v(shape_numel(shape));
        for (double& x : v) x = rng.uniform(-bound, bound);
        Tensor t = Tensor::constant(std::move(shape), std::move(v));
        t.set_requires_grad(true);
        return t;
    };
    GateParams psi;
    psi.w1 = fill({kIn, hidden}, kIn);
    psi.b1 = fill({hidden}, kIn);
    psi.w2 = fill({hidden, 1}, hidden);
    psi.b2 = Tensor::vector({kGateBiasInit});
    psi.b2.set_requires_grad(true);
    return psi;
}

Tensor gate(Tape& tape, const Context& context, const GateParams& psi) {
    Tensor x = Tensor::vector(
        {context.env[0], context.env[1], context.env[2], context.frame});
    Tensor hidden = tape.relu(tape.add(tape.matmul(x, psi.w1), psi.b1));
    Tensor z = tape.add(tape.matmul(hidden, psi.w2), psi.b2);
    Tensor suppressed = tape.sub(z, Tensor::scalar(psi.kappa * context.load));
    return tape.sigmoid(suppressed);
}

Tensor blend(Tape& tape, const Tensor& y1, const Tensor& y2, const Tensor& g) {
    Tensor one_minus = tape.sub(Tensor::scalar(1.0), g);
    return tape.add(tape.mul_scalar(y2, g), tape.mul_scalar(y1, one_minus));
}

void WorkingMemory::store(std::vector<double> delta) {
    slot_ = Override{std::move(delta), 1.0};
}

std::optional<WorkingMemory::Override> WorkingMemory::consume() {
    std::optional<Override> out = std::move(slot_);
    slot_.reset();
    return out;
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_meta: return "no-meta";
        case Variant::meta_only: return "meta-only";
        case Variant::controller_only: return "controller-only";
    }
    return "?";
}

Variant parse_variant(const std::string& name) {
    for (Variant v : {Variant::full, Variant::no_meta, Variant::meta_only,
                      Variant::controller_only}) {
        if (name == variant_name(v)) return v;
    }
    throw ValidationError("unknown variant '" + name +
                          "' (valid: full, no-meta, meta-only, controller-only)");
}

const char* gate_mode_name(GateMode m) {
    switch (m) {
        case GateMode::learned: return "learned";
        case GateMode::fixed_zero: return "fixed-zero";
        case GateMode::fixed_one: return "fixed-one";
    }
    return "?";
}

GateMode parse_gate_mode(const std::string& name) {
    for (GateMode m :
         {GateMode::learned, GateMode::fixed_zero, GateMode::fixed_one}) {
        if (name == gate_mode_name(m)) return m;
    }
    throw ValidationError("unknown gate mode '" + name +
                          "' (valid: learned, fixed-zero, fixed-one)");
}

ModelState init_model(const DimsConfig& dims, bool include_bob,
                      Variant variant, std::uint64_t seed) {
    ModelState state;
    state.dims = dims;
    state.include_bob = include_bob;
    state.agents = {NodeKind::Sally, NodeKind::Anne};
    if (include_bob) state.agents.push_back(NodeKind::Bob);
    state.variant = variant;

    Rng rng_s1(child_seed(seed, "system1"));
    state.system1 = init_system1(dims, state.agents, rng_s1);
    if (variant == Variant::no_meta || variant == Variant::controller_only) {
        for (auto& [kind, tensor] : state.system1.meta) {
            std::fill(tensor.values_mut().begin(), tensor.values_mut().end(),
                      0.0);
            tensor.set_requires_grad(false);
        }
    }

    state.theta_flat = flatten_params(state.system1);

    Rng rng_c(child_seed(seed, "controller"));
    state.controller = init_controller(state.theta_flat.size(), rng_c);

    Rng rng_g(child_seed(seed, "gate"));
    state.gate = init_gate(rng_g);

    if (variant == Variant::controller_only) state.gate_mode = GateMode::fixed_one;
    return state;
}

BeliefLabel predict_label(const std::array<double, 2>& distribution) {
    return distribution[1] > distribution[0] ? BeliefLabel::Basket
                                             : BeliefLabel::Box;
}

namespace {

std::array<double, 2> to_distribution(const Tensor& logits) {
    const std::vector<double> p = softmax_values(logits.values());
    return {p[0], p[1]};
}

// Ones over theta, zeros over the trailing per-agent meta block.
Tensor meta_block_mask(const ModelState& state) {
    const std::size_t p = state.param_dim();
    const std::size_t meta_block = state.agents.size() * state.dims.meta_dim;
    std::vector<double> mask(p, 1.0);
    for (std::size_t i = p - meta_block; i < p; ++i) mask[i] = 0.0;
    return Tensor::vector(std::move(mask));
}

}  // namespace

InferOutput run_inference(Tape& tape, const ScenarioGraph& graph,
                          NodeKind agent, const Context& context,
                          const ModelState& state, BeliefLabel label,
                          WorkingMemory* memory) {
    InferOutput out;
    out.y1 = forward_system1(tape, graph, agent, state.system1);

    Tensor theta = Tensor::vector(state.theta_flat);

    std::optional<WorkingMemory::Override> prime;
    if (memory) prime = memory->consume();

    if (prime) {
        out.delta = Tensor::vector(prime->delta);
        out.y2 = adapted_forward(tape, graph, agent, theta, out.delta,
                                 state.dims, state.agents);
        out.gate_value = Tensor::scalar(prime->gate_override);
        out.blended = out.y2;
    } else {
        const bool controller_active = state.variant != Variant::meta_only;
        if (controller_active) {
            out.delta = controller_delta(tape, out.y1, theta, context,
                                         state.controller);
            if (state.variant == Variant::no_meta ||
                state.variant == Variant::controller_only) {
                // Frozen-zero meta also holds under injection: the delta
                // cannot rewrite the meta block.
                out.delta = tape.mul(out.delta, meta_block_mask(state));
            }
            out.y2 = adapted_forward(tape, graph, agent, theta, out.delta,
                                     state.dims, state.agents);
        } else {
            out.y2 = out.y1;
        }
        switch (state.gate_mode) {
            case GateMode::learned:
                out.gate_value = gate(tape, context, state.gate);
                out.blended = blend(tape, out.y1, out.y2, out.gate_value);
                break;
            case GateMode::fixed_zero:
                out.gate_value = Tensor::scalar(0.0);
                out.blended = blend(tape, out.y1, out.y2, out.gate_value);
                break;
            case GateMode::fixed_one:
                out.gate_value = Tensor::scalar(1.0);
                out.blended = out.y2;
                break;
        }
    }

    TrialRecord& r = out.record;
    r.context = context;
    r.agent = agent;
    r.g = out.gate_value.item();
    r.p1 = to_distribution(out.y1);
    r.p2 = to_distribution(out.y2);
    r.blended = to_distribution(out.blended);
    r.predicted = predict_label(r.blended);
    r.label = label;
    r.correct = r.predicted == r.label;
    return out;
}

TrialRecord infer(const ScenarioGraph& graph, NodeKind agent,
                  const Context& context, const ModelState& state,
                  BeliefLabel label, WorkingMemory* memory) {
    Tape tape;
    return run_inference(tape, graph, agent, context, state, label, memory)
        .record;
}

}  // namespace dualmind
