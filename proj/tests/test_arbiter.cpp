#include <cmath>
#include <cstring>

#include "doctest.h"
#include "dualmind/arbiter.hpp"
#include "dualmind/errors.hpp"

using namespace dualmind;

namespace {

GateParams zero_gate() {
    GateParams psi;
    psi.w1 = Tensor::zeros({4, kGateHidden});
    psi.b1 = Tensor::zeros({kGateHidden});
    psi.w2 = Tensor::zeros({kGateHidden, 1});
    psi.b2 = Tensor::zeros({1});
    return psi;
}

}  // namespace

TEST_CASE("gate with zero weights follows the load penalty") {
    GateParams psi = zero_gate();
    Tape tape;
    CHECK(gate(tape, make_context({0, 0, 0}, 0.0), psi).item() == 0.5);
    const double loaded = gate(tape, make_context({0, 0, 0}, 1.0), psi).item();
    CHECK(std::abs(loaded - 0.00247) < 1e-5);
}

TEST_CASE("gate stays in (0,1) and decreases strictly with load") {
    Rng rng(64);
    GateParams psi = init_gate(rng);
    Tape tape;
    double prev = 1.0;
    for (double load : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        const double g =
            gate(tape, make_context({1, 0.5, 0.7}, load, 1.0), psi).item();
        CHECK(g > 0.0);
        CHECK(g < 1.0);
        CHECK(g < prev);
        prev = g;
    }
}

TEST_CASE("blend endpoints and midpoint") {
    Tape tape;
    Tensor y1 = Tensor::vector({2, 0});
    Tensor y2 = Tensor::vector({0, 2});
    Tensor at0 = blend(tape, y1, y2, Tensor::scalar(0.0));
    CHECK(at0.values()[0] == 2.0);
    CHECK(at0.values()[1] == 0.0);
    Tensor at1 = blend(tape, y1, y2, Tensor::scalar(1.0));
    CHECK(at1.values()[0] == 0.0);
    CHECK(at1.values()[1] == 2.0);
    Tensor mid = blend(tape, y1, y2, Tensor::scalar(0.5));
    CHECK(mid.values()[0] == 1.0);
    CHECK(mid.values()[1] == 1.0);
}

TEST_CASE("blended logits stay inside the convex hull") {
    Rng rng(12);
    Tape tape;
    for (int rep = 0; rep < 200; ++rep) {
        Tensor y1 = Tensor::vector({rng.uniform(-5, 5), rng.uniform(-5, 5)});
        Tensor y2 = Tensor::vector({rng.uniform(-5, 5), rng.uniform(-5, 5)});
        const double g = rng.uniform(0, 1);
        Tensor y = blend(tape, y1, y2, Tensor::scalar(g));
        for (std::size_t i = 0; i < 2; ++i) {
            const double lo = std::min(y1.values()[i], y2.values()[i]);
            const double hi = std::max(y1.values()[i], y2.values()[i]);
            CHECK(y.values()[i] >= lo - 1e-12);
            CHECK(y.values()[i] <= hi + 1e-12);
        }
    }
}

TEST_CASE("working memory holds one record and consumes once") {
    WorkingMemory memory;
    CHECK_FALSE(memory.occupied());
    CHECK_FALSE(memory.consume().has_value());

    memory.store({1.0, 2.0, 3.0});
    CHECK(memory.occupied());

    memory.store({4.0, 5.0});
    auto got = memory.consume();
    REQUIRE(got.has_value());
    CHECK(got->delta == std::vector<double>{4.0, 5.0});
    CHECK(got->gate_override == 1.0);
    CHECK_FALSE(memory.occupied());
    CHECK_FALSE(memory.consume().has_value());
}

TEST_CASE("tie-breaking resolves to Box") {
    CHECK(predict_label({0.5, 0.5}) == BeliefLabel::Box);
    CHECK(predict_label({0.3, 0.3}) == BeliefLabel::Box);
    CHECK(predict_label({0.2, 0.8}) == BeliefLabel::Basket);
}

TEST_CASE("fresh model: identical pathways, blended equals system 1") {
    const DimsConfig dims{6, 16, 8, 16, 2};
    ModelState state = init_model(dims, true, Variant::full, 321);
    const ScenarioGraph g = build_graph(true);
    for (const Context& c : enumerate_contexts()) {
        for (NodeKind agent : {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob}) {
            Tape tape;
            InferOutput out = run_inference(tape, g, agent, c, state,
                                            BeliefLabel::Box);
            CHECK(bit_equal(out.y1, out.y2));
            CHECK(out.record.p1 == out.record.p2);
            for (int i = 0; i < 2; ++i) {
                CHECK(std::abs(out.record.blended[i] - out.record.p1[i]) <
                      1e-12);
            }
        }
    }
}

TEST_CASE("primed inference overrides the gate for exactly one trial") {
    const DimsConfig dims{5, 16, 8, 16, 2};
    ModelState state = init_model(dims, false, Variant::full, 99);
    const ScenarioGraph g = build_graph(false);
    const Context probe = make_context(kAmbiguousEnv);

    WorkingMemory memory;
    std::vector<double> delta(state.param_dim(), 0.0);
    delta[0] = 0.25;
    memory.store(delta);

    TrialRecord first = infer(g, NodeKind::Sally, probe, state,
                              BeliefLabel::Basket, &memory);
    CHECK(first.g == 1.0);
    CHECK_FALSE(memory.occupied());

    TrialRecord second = infer(g, NodeKind::Sally, probe, state,
                               BeliefLabel::Basket, &memory);
    CHECK(second.g != 1.0);  // learned gate, not the override
}

TEST_CASE("variant names round-trip and reject unknowns") {
    CHECK(parse_variant("no-meta") == Variant::no_meta);
    CHECK(parse_variant("full") == Variant::full);
    CHECK_THROWS_AS(parse_variant("bogus"), ValidationError);
    CHECK(parse_gate_mode("fixed-one") == GateMode::fixed_one);
    CHECK_THROWS_AS(parse_gate_mode("bogus"), ValidationError);
}
