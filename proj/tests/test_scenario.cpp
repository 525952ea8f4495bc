#include <cmath>
#include <set>

#include "doctest.h"
#include "dualmind/errors.hpp"
#include "dualmind/scenario.hpp"

using namespace dualmind;

namespace {

// Independent recomputation of D^(-1/2)(A+I)D^(-1/2) from the edge list.
double expected_norm_entry(const ScenarioGraph& g, std::size_t i,
                           std::size_t j) {
    const std::size_t n = g.nodes.size();
    std::vector<double> deg(n, 1.0);
    auto connected = [&](std::size_t u, std::size_t v) {
        for (auto [a, b] : g.edges) {
            if ((a == u && b == v) || (a == v && b == u)) return true;
        }
        return false;
    };
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u != v && connected(u, v)) deg[u] += 1.0;
        }
    }
    const double aij = (i == j) ? 1.0 : (connected(i, j) ? 1.0 : 0.0);
    return aij / std::sqrt(deg[i] * deg[j]);
}

}  // namespace

TEST_CASE("five-node roster has identity features") {
    const ScenarioGraph g = build_graph(false);
    REQUIRE(g.nodes.size() == 5);
    CHECK(g.feature_dim() == 5);
    CHECK_FALSE(g.has(NodeKind::Bob));
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(g.features.values()[i * 5 + j] == (i == j ? 1.0 : 0.0));
        }
    }
    // one-hot rows sum to 1
    for (std::size_t i = 0; i < 5; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 5; ++j) s += g.features.values()[i * 5 + j];
        CHECK(s == 1.0);
    }
}

TEST_CASE("bob joins the roster like the other agents") {
    const ScenarioGraph g = build_graph(true);
    REQUIRE(g.nodes.size() == 6);
    CHECK(g.feature_dim() == 6);
    const std::size_t bob = g.index_of(NodeKind::Bob);
    std::set<std::size_t> bob_neighbors;
    for (auto [u, v] : g.edges) {
        if (u == bob) bob_neighbors.insert(v);
        if (v == bob) bob_neighbors.insert(u);
    }
    CHECK(bob_neighbors == std::set<std::size_t>{g.index_of(NodeKind::Box),
                                                 g.index_of(NodeKind::Basket),
                                                 g.index_of(NodeKind::Toy)});
    CHECK(g.agents() ==
          std::vector<NodeKind>{NodeKind::Sally, NodeKind::Anne, NodeKind::Bob});
}

TEST_CASE("normalized adjacency matches the literal formula entrywise") {
    for (bool bob : {false, true}) {
        const ScenarioGraph g = build_graph(bob);
        const std::size_t n = g.nodes.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(std::abs(g.adjacency_norm.values()[i * n + j] -
                               expected_norm_entry(g, i, j)) < 1e-12);
            }
        }
    }
    // hand-derived entries on the 5-node roster: deg(Sally)=deg(Anne)=5,
    // deg(Box)=deg(Basket)=4, deg(Toy)=5
    const ScenarioGraph g = build_graph(false);
    auto at = [&](NodeKind a, NodeKind b) {
        return g.adjacency_norm.values()[g.index_of(a) * 5 + g.index_of(b)];
    };
    CHECK(at(NodeKind::Sally, NodeKind::Anne) == doctest::Approx(0.2));
    CHECK(at(NodeKind::Sally, NodeKind::Box) ==
          doctest::Approx(1.0 / std::sqrt(20.0)));
    CHECK(at(NodeKind::Toy, NodeKind::Box) ==
          doctest::Approx(1.0 / std::sqrt(20.0)));
    CHECK(at(NodeKind::Sally, NodeKind::Sally) == doctest::Approx(0.2));
    CHECK(at(NodeKind::Box, NodeKind::Basket) == 0.0);
}

TEST_CASE("normalize_adjacency basic cases") {
    const std::vector<double> none(9, 0.0);
    const std::vector<double> eye = normalize_adjacency(none, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(eye[i * 3 + j] == (i == j ? 1.0 : 0.0));
        }
    }

    const std::vector<double> pair{0, 1, 1, 0};
    const std::vector<double> norm = normalize_adjacency(pair, 2);
    for (double v : norm) CHECK(v == doctest::Approx(0.5));

    // symmetric output for a random symmetric graph
    std::vector<double> a(16, 0.0);
    a[0 * 4 + 2] = a[2 * 4 + 0] = 1.0;
    a[1 * 4 + 3] = a[3 * 4 + 1] = 1.0;
    a[0 * 4 + 3] = a[3 * 4 + 0] = 1.0;
    const std::vector<double> s = normalize_adjacency(a, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(s[i * 4 + j] == doctest::Approx(s[j * 4 + i]));
        }
    }

    std::vector<double> asym(4, 0.0);
    asym[1] = 1.0;
    CHECK_THROWS_AS(normalize_adjacency(asym, 2), ValidationError);
    std::vector<double> diag(4, 0.0);
    diag[0] = 1.0;
    CHECK_THROWS_AS(normalize_adjacency(diag, 2), ValidationError);
}

TEST_CASE("belief oracle on the boolean reading") {
    auto ctx = [](double a, double b, double c) {
        return make_context({a, b, c});
    };
    const auto boolean = CueSemantics::boolean_observation;
    CHECK(ground_truth_belief(ctx(0, 0, 0), NodeKind::Sally, boolean) ==
          BeliefLabel::Box);
    CHECK(ground_truth_belief(ctx(0, 1, 0), NodeKind::Sally, boolean) ==
          BeliefLabel::Box);  // absent during the move
    CHECK(ground_truth_belief(ctx(1, 1, 0), NodeKind::Sally, boolean) ==
          BeliefLabel::Basket);
    CHECK(ground_truth_belief(ctx(0, 1, 1), NodeKind::Bob, boolean) ==
          BeliefLabel::Basket);
    CHECK(ground_truth_belief(ctx(0, 1, 0), NodeKind::Anne, boolean) ==
          BeliefLabel::Basket);  // Anne always sees her own move

    // no move: everyone answers Box; all bits set: everyone Basket
    for (NodeKind agent : {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob}) {
        CHECK(ground_truth_belief(ctx(1, 0, 1), agent, boolean) ==
              BeliefLabel::Box);
        CHECK(ground_truth_belief(ctx(1, 1, 1), agent, boolean) ==
              BeliefLabel::Basket);
    }

    CHECK_THROWS_AS(
        ground_truth_belief(ctx(0.5, 0, 0), NodeKind::Sally, boolean),
        ValidationError);
    CHECK_THROWS_AS(ground_truth_belief(ctx(0, 0, 0), NodeKind::Toy, boolean),
                    ValidationError);
}

TEST_CASE("belief oracle on the evidence reading") {
    const auto evidence = CueSemantics::evidence;
    CHECK(ground_truth_belief(make_context(kAnchorEnv), NodeKind::Sally,
                              evidence) == BeliefLabel::Box);
    CHECK(ground_truth_belief(make_context(kConflictEnv), NodeKind::Sally,
                              evidence) == BeliefLabel::Basket);
    CHECK(ground_truth_belief(make_context(kAmbiguousEnv), NodeKind::Sally,
                              evidence) == BeliefLabel::Basket);
    CHECK(ground_truth_belief(make_context({1.0, 0.5, 0.2}), NodeKind::Sally,
                              evidence) == BeliefLabel::Box);
}

TEST_CASE("context validation") {
    CHECK_THROWS_AS(make_context({1.5, 0, 0}), ValidationError);
    CHECK_THROWS_AS(make_context({0, 0, 0}, 0.0, 0.5), ValidationError);
    CHECK(make_context({0, 0, 0}, 2.0, 1.0).load == 1.0);
    CHECK(make_context({0, 0, 0}, -1.0, -1.0).load == 0.0);
    CHECK(context_vector(make_context({0.1, 0.2, 0.3}, 0.4, 1.0)) ==
          std::vector<double>{0.1, 0.2, 0.3, 0.4, 1.0});
}

TEST_CASE("context enumeration is lexicographic and distinct") {
    const std::vector<Context> all = enumerate_contexts();
    REQUIRE(all.size() == 8);
    CHECK(all.front().env == std::array<double, 3>{0, 0, 0});
    CHECK(all.back().env == std::array<double, 3>{1, 1, 1});
    std::set<std::array<double, 3>> seen;
    for (const Context& c : all) {
        CHECK(c.load == 0.0);
        CHECK(c.frame == 0.0);
        seen.insert(c.env);
    }
    CHECK(seen.size() == 8);
}

TEST_CASE("curricula are deterministic and correctly labeled") {
    for (CurriculumKind kind :
         {CurriculumKind::phase1_canonical, CurriculumKind::phase2_diverse,
          CurriculumKind::anchor, CurriculumKind::prime,
          CurriculumKind::fatigue, CurriculumKind::frame}) {
        const auto a = make_curriculum(kind);
        const auto b = make_curriculum(kind);
        CHECK(export_curriculum(a) == export_curriculum(b));
        CHECK_FALSE(a.empty());
    }

    const auto phase1 = make_curriculum(CurriculumKind::phase1_canonical);
    CHECK(phase1.size() == 16);
    for (const Trial& t : phase1) {
        CHECK(t.label == BeliefLabel::Box);
        CHECK(t.semantics == CueSemantics::boolean_observation);
        CHECK(t.context.load == 0.0);
        CHECK(t.context.frame == 0.0);
        CHECK(t.label ==
              ground_truth_belief(t.context, t.agent, t.semantics));
    }

    const auto anchor = make_curriculum(CurriculumKind::anchor);
    for (const Trial& t : anchor) {
        CHECK(t.context.env == kAnchorEnv);
        CHECK(t.label == BeliefLabel::Box);
        CHECK(t.semantics == CueSemantics::evidence);
    }

    const auto frames = make_curriculum(CurriculumKind::frame);
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].context.frame == -1.0);
    CHECK(frames[1].context.frame == 0.0);
    CHECK(frames[2].context.frame == 1.0);
    for (const Trial& t : frames) CHECK(t.context.env == kAmbiguousEnv);
}

TEST_CASE("curriculum names parse and reject") {
    CHECK(parse_curriculum_kind("anchor") == CurriculumKind::anchor);
    CHECK(parse_curriculum_kind("phase1-canonical") ==
          CurriculumKind::phase1_canonical);
    CHECK_THROWS_AS(parse_curriculum_kind("nope"), ValidationError);
}

TEST_CASE("curriculum export format") {
    const auto frames = make_curriculum(CurriculumKind::frame);
    const std::string text = export_curriculum(frames);
    CHECK(text.find("evidence,1,0.5,0.7,0,-1,Sally,Basket") !=
          std::string::npos);
}
