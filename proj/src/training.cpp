#include "dualmind/training.hpp"

#include <cmath>

#include "dualmind/adam.hpp"
#include "dualmind/errors.hpp"
#include "dualmind/rng.hpp"

namespace dualmind {

namespace {

std::size_t label_index(BeliefLabel l) {
    return static_cast<std::size_t>(l);
}

std::vector<Tensor> trainable_only(std::vector<Tensor> tensors) {
    std::vector<Tensor> out;
    for (Tensor& t : tensors) {
        if (t.requires_grad()) out.push_back(std::move(t));
    }
    return out;
}

double finite_or_throw(double loss, const char* phase) {
    if (!std::isfinite(loss)) {
        throw NumericError(std::string(phase) + ": loss is not finite");
    }
    return loss;
}

}  // namespace

LossCurve pretrain_system1(ModelState& state, const std::vector<Trial>& trials,
                           const TrainConfig& config) {
    if (trials.empty()) {
        throw ValidationError("pretrain_system1: empty trial list");
    }
    std::vector<Tensor> params = trainable_only(state.system1.tensors());
    Adam optimizer(params, AdamConfig{config.lr});
    // Allocate zero grads up front: a parameter the batch never touches
    // (an unqueried agent's meta-vector) still takes part in the step.
    optimizer.zero_grad();
    const double inv_n = 1.0 / static_cast<double>(trials.size());

    LossCurve curve;
    curve.reserve(static_cast<std::size_t>(config.phase1_epochs));
    for (int epoch = 0; epoch < config.phase1_epochs; ++epoch) {
        Tape tape;
        Tensor total;
        for (const Trial& t : trials) {
            Tensor logits = forward_system1(tape, t.graph, t.agent,
                                            state.system1);
            Tensor loss = tape.cross_entropy(logits, label_index(t.label));
            total = total.defined() ? tape.add(total, loss) : loss;
        }
        Tensor mean = tape.scale(total, inv_n);
        curve.push_back(finite_or_throw(mean.item(), "phase1"));
        tape.backward(mean);
        optimizer.step();
        optimizer.zero_grad();
    }

    state.theta_flat = flatten_params(state.system1);
    state.phase1_done = true;
    return curve;
}

LossCurve train_system2(ModelState& state, const std::vector<Trial>& trials,
                        const TrainConfig& config) {
    if (!state.phase1_done) {
        throw StateError("train_system2: System 1 has not been pretrained");
    }
    if (trials.empty()) {
        throw ValidationError("train_system2: empty trial list");
    }

    // Freeze theta; meta-vectors keep training unless configured otherwise.
    state.system1.w_gcn.set_requires_grad(false);
    state.system1.w_head1.set_requires_grad(false);
    state.system1.b_head1.set_requires_grad(false);
    state.system1.w_head2.set_requires_grad(false);
    state.system1.b_head2.set_requires_grad(false);
    if (config.freeze_meta_in_phase2) {
        for (auto& [kind, tensor] : state.system1.meta) {
            tensor.set_requires_grad(false);
        }
    }

    const bool train_controller = state.variant != Variant::meta_only;
    const bool train_gate = state.gate_mode == GateMode::learned;

    std::vector<Tensor> params;
    if (train_controller) {
        for (Tensor& t : state.controller.tensors()) params.push_back(t);
    }
    if (train_gate) {
        for (Tensor& t : state.gate.tensors()) params.push_back(t);
    }
    for (auto& [kind, tensor] : state.system1.meta) {
        if (tensor.requires_grad()) params.push_back(tensor);
    }
    Adam optimizer(params, AdamConfig{config.phase2_lr});
    optimizer.zero_grad();
    const double inv_n = 1.0 / static_cast<double>(trials.size());

    Rng order_rng(child_seed(config.seed, "phase2-order"));
    std::vector<std::size_t> order(trials.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    // One Adam step per trial (the inner-loop update of the protocol), with
    // a fresh tape per inference; the curve records the epoch's mean loss.
    LossCurve curve;
    for (int epoch = 0; epoch < config.phase2_epochs; ++epoch) {
        if (config.shuffle_phase2) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1],
                          order[order_rng.next_u64() % i]);
            }
        }
        double total = 0.0;
        for (std::size_t idx : order) {
            const Trial& t = trials[idx];
            Tape tape;
            InferOutput out = run_inference(tape, t.graph, t.agent, t.context,
                                            state, t.label, nullptr);
            Tensor loss = tape.cross_entropy(out.blended,
                                             label_index(t.label));
            total += finite_or_throw(loss.item(), "phase2");
            tape.backward(loss);
            if (train_controller) mask_frame_row_grad(state.controller);
            optimizer.step();
            optimizer.zero_grad();
        }
        const double mean = total * inv_n;
        curve.push_back(mean);
        if (mean < config.phase2_early_stop) break;
    }
    return curve;
}

TrainedModel run_variant(Variant variant, const Curricula& curricula,
                         const TrainConfig& config) {
    if (curricula.phase1.empty() || curricula.phase2.empty()) {
        throw ValidationError("run_variant: empty curriculum");
    }
    const ScenarioGraph& g = curricula.phase1.front().graph;
    DimsConfig dims = config.dims;
    dims.feature_dim = g.feature_dim();

    TrainedModel trained{
        init_model(dims, g.has(NodeKind::Bob), variant, config.seed), {}, {}};
    TrainConfig cfg = config;
    cfg.variant = variant;
    trained.phase1_loss = pretrain_system1(trained.state, curricula.phase1, cfg);
    trained.phase2_loss = train_system2(trained.state, curricula.phase2, cfg);
    return trained;
}

std::uint64_t theta_checksum(const System1Params& params) {
    std::vector<double> all;
    for (const Tensor* t : {&params.w_gcn, &params.w_head1, &params.b_head1,
                            &params.w_head2, &params.b_head2}) {
        all.insert(all.end(), t->values().begin(), t->values().end());
    }
    return value_checksum(all);
}

std::uint64_t model_checksum(const ModelState& state) {
    std::vector<double> all = flatten_params(state.system1);
    auto append = [&all](const Tensor& t) {
        all.insert(all.end(), t.values().begin(), t.values().end());
    };
    append(state.controller.w1);
    append(state.controller.b1);
    append(state.controller.w2);
    append(state.controller.b2);
    append(state.gate.w1);
    append(state.gate.b1);
    append(state.gate.w2);
    append(state.gate.b2);
    return value_checksum(all);
}

}  // namespace dualmind
