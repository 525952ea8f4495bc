#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualmind/rng.hpp"
#include "dualmind/scenario.hpp"
#include "dualmind/system1.hpp"
#include "dualmind/system2.hpp"
#include "dualmind/tensor.hpp"

namespace dualmind {

/// Contextual gate: g = sigmoid(MLP(env ++ frame) - kappa * load), strictly
/// inside (0,1). The load term is a fixed suppression, not trained; kappa is
/// constant for the lifetime of a run. The final bias starts negative so an
/// untrained model leans habitual.
struct GateParams {
    Tensor w1;  // 4 x hidden
    Tensor b1;  // hidden
    Tensor w2;  // hidden x 1
    Tensor b2;  // 1
    double kappa = 6.0;

    std::vector<Tensor> tensors() { return {w1, b1, w2, b2}; }
};

inline constexpr std::size_t kGateHidden = 8;
inline constexpr double kGateBiasInit = -0.6;

GateParams init_gate(Rng& rng, std::size_t hidden = kGateHidden);

/// One-element tensor holding g.
Tensor gate(Tape& tape, const Context& context, const GateParams& psi);

/// Convex combination on logits: g*y2 + (1-g)*y1.
Tensor blend(Tape& tape, const Tensor& y1, const Tensor& y2, const Tensor& g);

/// Single-slot transient override. Storing replaces any previous record;
/// consuming returns and clears the slot, so a stored prime affects exactly
/// the first inference after storage.
class WorkingMemory {
  public:
    struct Override {
        std::vector<double> delta;
        double gate_override = 1.0;
    };

    void store(std::vector<double> delta);
    std::optional<Override> consume();
    bool occupied() const { return slot_.has_value(); }

  private:
    std::optional<Override> slot_;
};

/// Per-inference trace row.
struct TrialRecord {
    std::string experiment;
    Context context;
    NodeKind agent = NodeKind::Sally;
    double g = 0.0;
    std::array<double, 2> p1{};       // System 1 distribution (Box, Basket)
    std::array<double, 2> p2{};       // System 2 distribution
    std::array<double, 2> blended{};  // final distribution
    BeliefLabel predicted = BeliefLabel::Box;
    BeliefLabel label = BeliefLabel::Box;
    bool correct = false;
};

enum class Variant { full, no_meta, meta_only, controller_only };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

/// How the gate enters the blend. `fixed_zero`/`fixed_one` replace the
/// learned gate with a constant (the "System 2 disabled"/"System 2 only"
/// switches); controller_only implies fixed_one.
enum class GateMode { learned, fixed_zero, fixed_one };

const char* gate_mode_name(GateMode m);
GateMode parse_gate_mode(const std::string& name);

/// Everything a trained model carries: System-1 parameters and meta-vectors,
/// the frozen flat snapshot the controller conditions on, controller and
/// gate parameters, and the variant switches.
struct ModelState {
    DimsConfig dims;
    bool include_bob = true;
    std::vector<NodeKind> agents;
    System1Params system1;
    std::vector<double> theta_flat;  // snapshot of flatten(theta, m)
    ControllerParams controller;
    GateParams gate;
    Variant variant = Variant::full;
    GateMode gate_mode = GateMode::learned;
    bool phase1_done = false;

    std::size_t param_dim() const { return theta_flat.size(); }
};

/// Fresh model. no_meta and controller_only zero and freeze the
/// meta-vectors; controller_only also pins the gate to 1. The controller
/// output layer is zero, so y2 equals y1 bit-exactly until phase 2 runs.
ModelState init_model(const DimsConfig& dims, bool include_bob,
                      Variant variant, std::uint64_t seed);

/// Tensor-level result of one inference, used by training; `record` carries
/// the softmaxed distributions.
struct InferOutput {
    Tensor y1;
    Tensor y2;
    Tensor blended;
    Tensor gate_value;  // one element; constant tensor under fixed modes
    Tensor delta;       // controller output; undefined when not computed
    TrialRecord record;
};

/// Full pipeline on an explicit tape. When `memory` holds a prime, it is
/// consumed: y2 comes from the stored delta and the gate is overridden to 1.
InferOutput run_inference(Tape& tape, const ScenarioGraph& graph,
                          NodeKind agent, const Context& context,
                          const ModelState& state, BeliefLabel label,
                          WorkingMemory* memory = nullptr);

/// Record-only convenience wrapper around run_inference.
TrialRecord infer(const ScenarioGraph& graph, NodeKind agent,
                  const Context& context, const ModelState& state,
                  BeliefLabel label, WorkingMemory* memory = nullptr);

/// Argmax with ties resolved toward Box (class 0).
BeliefLabel predict_label(const std::array<double, 2>& distribution);

}  // namespace dualmind
