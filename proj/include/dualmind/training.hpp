#pragma once

#include <cstdint>
#include <vector>

#include "dualmind/arbiter.hpp"
#include "dualmind/scenario.hpp"

namespace dualmind {

struct TrainConfig {
    int phase1_epochs = 60;
    int phase2_epochs = 200;
    double lr = 0.01;
    /// Learning rate of the phase-2 inner-loop steps. The default matches
    /// lr; the generalization protocols run the controller cooler (recorded
    /// in run manifests) because per-instance updates at 0.01 push the
    /// controller's hidden layer into the dead-ReLU regime.
    double phase2_lr = 0.01;
    std::uint64_t seed = 0;
    bool freeze_meta_in_phase2 = false;
    Variant variant = Variant::full;
    /// Phase 2 stops early once the mean loss drops below this.
    double phase2_early_stop = 1e-4;
    /// Visit phase-2 trials in a seeded random order each epoch; per-trial
    /// updates through a fixed order can lock into limit cycles.
    bool shuffle_phase2 = true;
    DimsConfig dims;  // feature_dim is taken from the curriculum graph
};

/// Mean cross-entropy per epoch; length equals the number of epochs run.
using LossCurve = std::vector<double>;

/// Phase 1: full-batch epochs over the canonical trials, Adam on the GCN,
/// head and meta-vectors. Finishes by snapshotting theta_flat and marking
/// the model pretrained. ValidationError on an empty trial list,
/// NumericError when the loss goes non-finite.
LossCurve pretrain_system1(ModelState& state, const std::vector<Trial>& trials,
                           const TrainConfig& config);

/// Phase 2: System-1 weights frozen; the controller, gate and (unless
/// frozen) meta-vectors train on the full inference pipeline. StateError if
/// phase 1 has not run.
LossCurve train_system2(ModelState& state, const std::vector<Trial>& trials,
                        const TrainConfig& config);

struct Curricula {
    std::vector<Trial> phase1;
    std::vector<Trial> phase2;
};

struct TrainedModel {
    ModelState state;
    LossCurve phase1_loss;
    LossCurve phase2_loss;
};

/// Fresh model with the variant's switches applied, trained through both
/// phases. Graph roster and feature width come from the curriculum.
TrainedModel run_variant(Variant variant, const Curricula& curricula,
                         const TrainConfig& config);

/// Checksum of the phase-1 weights theta (GCN + head, meta-vectors excluded
/// because they may keep training); used to verify the freeze contract.
std::uint64_t theta_checksum(const System1Params& params);

/// Checksum over every parameter group (theta, meta, controller, gate).
std::uint64_t model_checksum(const ModelState& state);

}  // namespace dualmind
