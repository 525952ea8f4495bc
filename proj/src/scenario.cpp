#include "dualmind/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dualmind/errors.hpp"

namespace dualmind {

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Sally: return "Sally";
        case NodeKind::Anne: return "Anne";
        case NodeKind::Bob: return "Bob";
        case NodeKind::Box: return "Box";
        case NodeKind::Basket: return "Basket";
        case NodeKind::Toy: return "Toy";
    }
    return "?";
}

NodeKind parse_node_kind(const std::string& name) {
    for (NodeKind k : {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob,
                       NodeKind::Box, NodeKind::Basket, NodeKind::Toy}) {
        if (name == node_kind_name(k)) return k;
    }
    throw ValidationError("unknown node kind '" + name + "'");
}

bool is_agent(NodeKind k) {
    return k == NodeKind::Sally || k == NodeKind::Anne || k == NodeKind::Bob;
}

const char* label_name(BeliefLabel l) {
    return l == BeliefLabel::Box ? "Box" : "Basket";
}

const char* cue_semantics_name(CueSemantics s) {
    return s == CueSemantics::boolean_observation ? "boolean" : "evidence";
}

bool ScenarioGraph::has(NodeKind k) const {
    return std::find(nodes.begin(), nodes.end(), k) != nodes.end();
}

std::size_t ScenarioGraph::index_of(NodeKind k) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == k) return i;
    }
    throw IndexError(std::string("graph: no node of kind ") +
                     node_kind_name(k));
}

std::vector<NodeKind> ScenarioGraph::agents() const {
    std::vector<NodeKind> out;
    for (NodeKind k : nodes) {
        if (is_agent(k)) out.push_back(k);
    }
    return out;
}

Context make_context(std::array<double, 3> env, double load, double frame) {
    for (double e : env) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw ValidationError("context: env cue " + std::to_string(e) +
                                  " outside [0, 1]");
        }
    }
    if (frame != -1.0 && frame != 0.0 && frame != 1.0) {
        throw ValidationError("context: frame " + std::to_string(frame) +
                              " not in {-1, 0, +1}");
    }
    Context c;
    c.env = env;
    c.load = std::clamp(load, 0.0, 1.0);
    c.frame = frame;
    return c;
}

std::vector<double> context_vector(const Context& c) {
    return {c.env[0], c.env[1], c.env[2], c.load, c.frame};
}

std::vector<double> normalize_adjacency(const std::vector<double>& a,
                                        std::size_t n) {
    if (a.size() != n * n) {
        throw ValidationError("normalize_adjacency: matrix size mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i * n + i] != 0.0) {
            throw ValidationError("normalize_adjacency: nonzero diagonal");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double v = a[i * n + j];
            if (v != 0.0 && v != 1.0) {
                throw ValidationError("normalize_adjacency: entries must be 0/1");
            }
            if (v != a[j * n + i]) {
                throw ValidationError("normalize_adjacency: asymmetric input");
            }
        }
    }
    // degrees of A + I
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 1.0;
        for (std::size_t j = 0; j < n; ++j) d += a[i * n + j];
        inv_sqrt_deg[i] = 1.0 / std::sqrt(d);
    }
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double aij = a[i * n + j] + (i == j ? 1.0 : 0.0);
            out[i * n + j] = inv_sqrt_deg[i] * aij * inv_sqrt_deg[j];
        }
    }
    return out;
}

ScenarioGraph make_graph(
    std::vector<NodeKind> nodes,
    std::vector<std::pair<std::size_t, std::size_t>> edges) {
    const std::size_t n = nodes.size();
    std::vector<double> adj(n * n, 0.0);
    for (auto [u, v] : edges) {
        if (u >= n || v >= n || u == v) {
            throw ValidationError("make_graph: bad edge");
        }
        adj[u * n + v] = 1.0;
        adj[v * n + u] = 1.0;
    }
    ScenarioGraph g;
    g.features = Tensor::matrix(n, n, [&] {
        std::vector<double> x(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) x[i * n + i] = 1.0;
        return x;
    }());
    g.adjacency_norm = Tensor::matrix(n, n, normalize_adjacency(adj, n));
    g.nodes = std::move(nodes);
    g.edges = std::move(edges);
    return g;
}

ScenarioGraph build_graph(bool include_bob) {
    std::vector<NodeKind> nodes{NodeKind::Sally, NodeKind::Anne, NodeKind::Box,
                                NodeKind::Basket, NodeKind::Toy};
    if (include_bob) nodes.push_back(NodeKind::Bob);

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    auto idx = [&](NodeKind k) {
        return static_cast<std::size_t>(
            std::find(nodes.begin(), nodes.end(), k) - nodes.begin());
    };
    edges.emplace_back(idx(NodeKind::Sally), idx(NodeKind::Anne));
    for (NodeKind agent : {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob}) {
        if (agent == NodeKind::Bob && !include_bob) continue;
        edges.emplace_back(idx(agent), idx(NodeKind::Box));
        edges.emplace_back(idx(agent), idx(NodeKind::Basket));
        edges.emplace_back(idx(agent), idx(NodeKind::Toy));
    }
    edges.emplace_back(idx(NodeKind::Toy), idx(NodeKind::Box));
    edges.emplace_back(idx(NodeKind::Toy), idx(NodeKind::Basket));
    return make_graph(std::move(nodes), std::move(edges));
}

BeliefLabel ground_truth_belief(const Context& context, NodeKind agent,
                                CueSemantics semantics) {
    if (!is_agent(agent)) {
        throw ValidationError(std::string("ground_truth_belief: ") +
                              node_kind_name(agent) + " is not an agent");
    }
    if (semantics == CueSemantics::boolean_observation) {
        for (double e : context.env) {
            if (e != 0.0 && e != 1.0) {
                throw ValidationError(
                    "ground_truth_belief: non-boolean cue under boolean "
                    "semantics");
            }
        }
        const bool sally_present = context.env[0] != 0.0;
        const bool anne_moves = context.env[1] != 0.0;
        const bool bob_peeks = context.env[2] != 0.0;
        if (!anne_moves) return BeliefLabel::Box;
        bool observed = false;
        switch (agent) {
            case NodeKind::Anne: observed = true; break;
            case NodeKind::Sally: observed = sally_present; break;
            case NodeKind::Bob: observed = bob_peeks; break;
            default: break;
        }
        return observed ? BeliefLabel::Basket : BeliefLabel::Box;
    }
    // Evidence reading: env[1] is the in-box probability, env[2] the
    // moved-evidence cue that breaks a dead-even tie.
    if (context.env[1] > 0.5) return BeliefLabel::Box;
    if (context.env[1] < 0.5) return BeliefLabel::Basket;
    return context.env[2] >= 0.5 ? BeliefLabel::Basket : BeliefLabel::Box;
}

std::vector<Context> enumerate_contexts() {
    std::vector<Context> out;
    out.reserve(8);
    for (int b0 = 0; b0 <= 1; ++b0) {
        for (int b1 = 0; b1 <= 1; ++b1) {
            for (int b2 = 0; b2 <= 1; ++b2) {
                out.push_back(make_context({static_cast<double>(b0),
                                            static_cast<double>(b1),
                                            static_cast<double>(b2)}));
            }
        }
    }
    return out;
}

const char* curriculum_kind_name(CurriculumKind k) {
    switch (k) {
        case CurriculumKind::phase1_canonical: return "phase1-canonical";
        case CurriculumKind::phase2_diverse: return "phase2-diverse";
        case CurriculumKind::anchor: return "anchor";
        case CurriculumKind::prime: return "prime";
        case CurriculumKind::fatigue: return "fatigue";
        case CurriculumKind::frame: return "frame";
    }
    return "?";
}

CurriculumKind parse_curriculum_kind(const std::string& name) {
    for (CurriculumKind k :
         {CurriculumKind::phase1_canonical, CurriculumKind::phase2_diverse,
          CurriculumKind::anchor, CurriculumKind::prime, CurriculumKind::fatigue,
          CurriculumKind::frame}) {
        if (name == curriculum_kind_name(k)) return k;
    }
    throw ValidationError(
        "unknown curriculum '" + name +
        "' (valid: phase1-canonical, phase2-diverse, anchor, prime, fatigue, "
        "frame)");
}

namespace {

Trial boolean_trial(const ScenarioGraph& g, const Context& c, NodeKind agent) {
    return Trial{g, c, agent,
                 ground_truth_belief(c, agent, CueSemantics::boolean_observation),
                 CueSemantics::boolean_observation};
}

Trial evidence_trial(const ScenarioGraph& g, std::array<double, 3> env,
                     double frame, BeliefLabel label,
                     NodeKind agent = NodeKind::Sally) {
    return Trial{g, make_context(env, 0.0, frame), agent, label,
                 CueSemantics::evidence};
}

}  // namespace

std::vector<Trial> make_curriculum(CurriculumKind kind) {
    std::vector<Trial> out;
    switch (kind) {
        case CurriculumKind::phase1_canonical: {
            // Contexts where the habitual default is already the answer.
            const ScenarioGraph g = build_graph(true);
            for (const Context& c : enumerate_contexts()) {
                for (NodeKind agent :
                     {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob}) {
                    Trial t = boolean_trial(g, c, agent);
                    if (t.label == BeliefLabel::Box) out.push_back(std::move(t));
                }
            }
            break;
        }
        case CurriculumKind::phase2_diverse: {
            const ScenarioGraph g = build_graph(true);
            for (const Context& c : enumerate_contexts()) {
                for (NodeKind agent :
                     {NodeKind::Sally, NodeKind::Anne, NodeKind::Bob}) {
                    out.push_back(boolean_trial(g, c, agent));
                }
            }
            out.push_back(evidence_trial(g, kAnchorEnv, 0.0, BeliefLabel::Box));
            out.push_back(
                evidence_trial(g, kConflictEnv, 0.0, BeliefLabel::Basket));
            out.push_back(
                evidence_trial(g, kAmbiguousEnv, 0.0, BeliefLabel::Basket));
            // Frame statistically predicts which pathway is right: positive
            // with ambiguity, negative with the canonical case.
            out.push_back(
                evidence_trial(g, kAmbiguousEnv, 1.0, BeliefLabel::Basket));
            out.push_back(evidence_trial(g, kAnchorEnv, -1.0, BeliefLabel::Box));
            break;
        }
        case CurriculumKind::anchor: {
            const ScenarioGraph g = build_graph(false);
            for (int i = 0; i < 5; ++i) {
                out.push_back(evidence_trial(g, kAnchorEnv, 0.0, BeliefLabel::Box));
            }
            break;
        }
        case CurriculumKind::prime: {
            // Probe, priming presentation, primed probe, post-prime probe.
            const ScenarioGraph g = build_graph(false);
            out.push_back(
                evidence_trial(g, kAmbiguousEnv, 0.0, BeliefLabel::Basket));
            out.push_back(
                evidence_trial(g, kConflictEnv, 0.0, BeliefLabel::Basket));
            out.push_back(
                evidence_trial(g, kAmbiguousEnv, 0.0, BeliefLabel::Basket));
            out.push_back(
                evidence_trial(g, kAmbiguousEnv, 0.0, BeliefLabel::Basket));
            break;
        }
        case CurriculumKind::fatigue: {
            const ScenarioGraph g = build_graph(false);
            for (double load : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                out.push_back(Trial{g, make_context(kAmbiguousEnv, load, 0.0),
                                    NodeKind::Sally, BeliefLabel::Basket,
                                    CueSemantics::evidence});
                out.push_back(Trial{g, make_context(kAnchorEnv, load, 0.0),
                                    NodeKind::Sally, BeliefLabel::Box,
                                    CueSemantics::evidence});
            }
            break;
        }
        case CurriculumKind::frame: {
            const ScenarioGraph g = build_graph(false);
            for (double frame : {-1.0, 0.0, 1.0}) {
                out.push_back(
                    evidence_trial(g, kAmbiguousEnv, frame, BeliefLabel::Basket));
            }
            break;
        }
    }
    return out;
}

std::string export_curriculum(const std::vector<Trial>& trials) {
    std::ostringstream os;
    for (const Trial& t : trials) {
        os << cue_semantics_name(t.semantics);
        for (double e : t.context.env) os << "," << e;
        os << "," << t.context.load << "," << t.context.frame << ","
           << node_kind_name(t.agent) << "," << label_name(t.label) << "\n";
    }
    return os.str();
}

}  // namespace dualmind
