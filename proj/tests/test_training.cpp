#include <cmath>
#include <cstring>
#include <limits>

#include "doctest.h"
#include "dualmind/errors.hpp"
#include "dualmind/experiments.hpp"
#include "dualmind/training.hpp"

using namespace dualmind;

namespace {

TrainConfig quick_config(std::uint64_t seed, int p1 = 10, int p2 = 10) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.phase1_epochs = p1;
    cfg.phase2_epochs = p2;
    cfg.phase2_early_stop = 0.0;  // run every epoch, simpler to reason about
    return cfg;
}

}  // namespace

TEST_CASE("zero epochs leave parameters untouched bit for bit") {
    Curricula c = loo_curricula(0);
    DimsConfig dims;
    dims.feature_dim = 6;
    ModelState state = init_model(dims, true, Variant::full, 7);
    const std::vector<double> before = flatten_params(state.system1);

    TrainConfig cfg = quick_config(7, 0, 0);
    const LossCurve curve = pretrain_system1(state, c.phase1, cfg);
    CHECK(curve.empty());
    CHECK(state.phase1_done);
    const std::vector<double> after = flatten_params(state.system1);
    CHECK(std::memcmp(before.data(), after.data(),
                      before.size() * sizeof(double)) == 0);
}

TEST_CASE("empty curricula are rejected") {
    DimsConfig dims;
    dims.feature_dim = 6;
    ModelState state = init_model(dims, true, Variant::full, 7);
    TrainConfig cfg = quick_config(7);
    CHECK_THROWS_AS(pretrain_system1(state, {}, cfg), ValidationError);
}

TEST_CASE("phase 2 requires a pretrained phase 1") {
    Curricula c = loo_curricula(0);
    DimsConfig dims;
    dims.feature_dim = 6;
    ModelState state = init_model(dims, true, Variant::full, 7);
    TrainConfig cfg = quick_config(7);
    CHECK_THROWS_AS(train_system2(state, c.phase2, cfg), StateError);
}

TEST_CASE("theta is frozen through phase 2") {
    Curricula c = loo_curricula(2);
    DimsConfig dims;
    dims.feature_dim = 6;
    ModelState state = init_model(dims, true, Variant::full, 11);
    TrainConfig cfg = quick_config(11, 8, 12);
    pretrain_system1(state, c.phase1, cfg);
    const std::uint64_t theta_before = theta_checksum(state.system1);
    const std::vector<double> snapshot = state.theta_flat;
    train_system2(state, c.phase2, cfg);
    CHECK(theta_checksum(state.system1) == theta_before);
    CHECK(state.theta_flat == snapshot);  // snapshot is not rewritten
}

TEST_CASE("identical seed and config give bit-identical models") {
    Curricula c = loo_curricula(1);
    TrainConfig cfg = quick_config(13, 6, 8);
    TrainedModel a = run_variant(Variant::full, c, cfg);
    TrainedModel b = run_variant(Variant::full, c, cfg);
    CHECK(model_checksum(a.state) == model_checksum(b.state));
    CHECK(a.phase1_loss == b.phase1_loss);
    CHECK(a.phase2_loss == b.phase2_loss);
}

TEST_CASE("phase-2 loss starts at the system-1 loss") {
    // With a zero delta and any gate, the blend of identical logits is the
    // system-1 answer, so epoch 0 must equal the plain system-1 loss.
    Curricula c = loo_curricula(0);
    c.phase2.resize(1);
    DimsConfig dims;
    dims.feature_dim = 6;
    ModelState state = init_model(dims, true, Variant::full, 17);
    TrainConfig cfg = quick_config(17, 0, 1);
    pretrain_system1(state, c.phase1, cfg);

    Tape tape;
    Tensor y1 = forward_system1(tape, c.phase2[0].graph, c.phase2[0].agent,
                                state.system1);
    const std::vector<double> p = softmax_values(y1.values());
    const double expected =
        -std::log(p[static_cast<std::size_t>(c.phase2[0].label)]);

    const LossCurve curve = train_system2(state, c.phase2, cfg);
    REQUIRE_FALSE(curve.empty());
    CHECK(std::abs(curve.front() - expected) < 1e-12);
}

TEST_CASE("variant switches hold their contracts") {
    Curricula c = loo_curricula(3);
    TrainConfig cfg = quick_config(19, 6, 8);

    SUBCASE("no-meta keeps meta-vectors at exactly zero") {
        TrainedModel trained = run_variant(Variant::no_meta, c, cfg);
        for (const auto& [kind, tensor] : trained.state.system1.meta) {
            for (double v : tensor.values()) CHECK(v == 0.0);
        }
    }

    SUBCASE("meta-only pins y2 to y1 on every trial") {
        TrainedModel trained = run_variant(Variant::meta_only, c, cfg);
        const ScenarioGraph g = build_graph(true);
        for (const Context& ctx : enumerate_contexts()) {
            TrialRecord rec = infer(g, NodeKind::Anne, ctx, trained.state,
                                    BeliefLabel::Box);
            CHECK(rec.p1 == rec.p2);
        }
    }

    SUBCASE("controller-only blends to y2 with gate pinned at one") {
        TrainedModel trained = run_variant(Variant::controller_only, c, cfg);
        const ScenarioGraph g = build_graph(true);
        for (const Context& ctx : enumerate_contexts()) {
            Tape tape;
            InferOutput out = run_inference(tape, g, NodeKind::Sally, ctx,
                                            trained.state, BeliefLabel::Box);
            CHECK(out.record.g == 1.0);
            CHECK(out.blended.same_storage(out.y2));
        }
        for (const auto& [kind, tensor] : trained.state.system1.meta) {
            for (double v : tensor.values()) CHECK(v == 0.0);
        }
    }
}

TEST_CASE("a gate pinned to zero starves the controller of gradient") {
    Curricula c = loo_curricula(0);
    DimsConfig dims;
    dims.feature_dim = 6;
    ModelState state = init_model(dims, true, Variant::full, 23);
    TrainConfig cfg = quick_config(23, 4, 0);
    pretrain_system1(state, c.phase1, cfg);
    state.gate_mode = GateMode::fixed_zero;

    Tape tape;
    Tensor total;
    for (const Trial& t : c.phase2) {
        InferOutput out = run_inference(tape, t.graph, t.agent, t.context,
                                        state, t.label);
        Tensor loss = tape.cross_entropy(
            out.blended, static_cast<std::size_t>(t.label));
        total = total.defined() ? tape.add(total, loss) : loss;
    }
    tape.backward(total);

    for (Tensor t : state.controller.tensors()) {
        REQUIRE(t.grad_present());
        for (double gv : t.grad()) CHECK(gv == 0.0);
    }
}

TEST_CASE("pretraining loss trends down over ten-epoch windows") {
    const std::vector<Trial> canonical =
        make_curriculum(CurriculumKind::phase1_canonical);
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        DimsConfig dims;
        dims.feature_dim = 6;
        ModelState state = init_model(dims, true, Variant::full, seed);
        TrainConfig cfg = quick_config(seed, 60, 0);
        const LossCurve curve = pretrain_system1(state, canonical, cfg);
        REQUIRE(curve.size() == 60);
        std::size_t violations = 0;
        std::size_t windows = 0;
        for (std::size_t i = 0; i + 10 < curve.size(); ++i) {
            ++windows;
            if (curve[i + 10] > curve[i]) ++violations;
        }
        CHECK(static_cast<double>(violations) <=
              0.05 * static_cast<double>(windows));
    }
}

TEST_CASE("training rejects non-finite losses with a numeric error") {
    Curricula c = loo_curricula(0);
    DimsConfig dims;
    dims.feature_dim = 6;
    ModelState state = init_model(dims, true, Variant::full, 29);
    // poison an output bias so relu cannot mask the NaN
    state.system1.b_head2.values_mut()[0] =
        std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg = quick_config(29, 2, 0);
    CHECK_THROWS_AS(pretrain_system1(state, c.phase1, cfg), NumericError);
}
