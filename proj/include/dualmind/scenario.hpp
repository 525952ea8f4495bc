#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dualmind/tensor.hpp"

namespace dualmind {

enum class NodeKind { Sally, Anne, Bob, Box, Basket, Toy };

const char* node_kind_name(NodeKind k);
NodeKind parse_node_kind(const std::string& name);
bool is_agent(NodeKind k);

/// Belief classes; class 0 is the initial toy location (Box), class 1 the
/// post-move location (Basket). Two classes everywhere in the system.
enum class BeliefLabel { Box = 0, Basket = 1 };

const char* label_name(BeliefLabel l);

/// Scene as a relational graph: ordered nodes, undirected edges, one-hot
/// features X (row i selects node i's kind slot) and the symmetrically
/// normalized adjacency D^(-1/2) (A+I) D^(-1/2).
struct ScenarioGraph {
    std::vector<NodeKind> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    Tensor features;        // nodes x feature_dim, rows one-hot
    Tensor adjacency_norm;  // nodes x nodes

    std::size_t feature_dim() const { return features.shape()[1]; }
    bool has(NodeKind k) const;
    /// Index of the node with the given kind; IndexError if absent.
    std::size_t index_of(NodeKind k) const;
    /// Agent nodes in node order.
    std::vector<NodeKind> agents() const;
};

/// Environmental cues, cognitive load and presentation frame. Load is
/// clamped to [0,1]; frame is one of {-1, 0, +1}.
struct Context {
    std::array<double, 3> env{0.0, 0.0, 0.0};
    double load = 0.0;
    double frame = 0.0;
};

/// Validating constructor: env entries must lie in [0,1], frame in
/// {-1, 0, +1} (ValidationError otherwise); load is clamped.
Context make_context(std::array<double, 3> env, double load = 0.0,
                     double frame = 0.0);

/// Serialization order consumed by the controller: [env0, env1, env2, load,
/// frame].
std::vector<double> context_vector(const Context& c);

/// How the three environment cues are read. The generalization family uses
/// boolean cues [sally_present, anne_moves, bob_peeks]; the bias family uses
/// graded evidence [sally_present, p(toy in box), moved-evidence]. Each
/// curriculum is tagged so labels from one reading never leak into the other.
enum class CueSemantics { boolean_observation, evidence };

const char* cue_semantics_name(CueSemantics s);

struct Trial {
    ScenarioGraph graph;
    Context context;
    NodeKind agent;
    BeliefLabel label;
    CueSemantics semantics;
};

/// Canonical roster (Sally, Anne, Box, Basket, Toy, with Bob appended when
/// flagged) with the fixed edge set: Sally-Anne, each agent to Box, Basket
/// and Toy, plus Toy-Box and Toy-Basket.
ScenarioGraph build_graph(bool include_bob);

/// General constructor used by build_graph and by permutation tests:
/// features are one-hot by node index, the adjacency is normalized here.
ScenarioGraph make_graph(std::vector<NodeKind> nodes,
                         std::vector<std::pair<std::size_t, std::size_t>> edges);

/// D^(-1/2) (A+I) D^(-1/2) of a flat row-major 0/1 adjacency with zero
/// diagonal; ValidationError when A is asymmetric, has diagonal entries or
/// non-binary values.
std::vector<double> normalize_adjacency(const std::vector<double>& a,
                                        std::size_t n);

/// Where the queried agent believes the toy is.
/// Boolean reading: the toy ends in Basket iff Anne moves it; an agent
/// believes the true location iff it observed the move (Anne always, Sally
/// iff present, Bob iff peeking) and the initial Box location otherwise.
/// Evidence reading: Box when the in-box evidence is strong, Basket when it
/// is weak, with a 0.5 tie broken by the moved-evidence cue.
BeliefLabel ground_truth_belief(const Context& context, NodeKind agent,
                                CueSemantics semantics);

/// All 8 boolean cue combinations, lexicographic, load = 0, frame = 0.
std::vector<Context> enumerate_contexts();

enum class CurriculumKind {
    phase1_canonical,
    phase2_diverse,
    anchor,
    prime,
    fatigue,
    frame,
};

const char* curriculum_kind_name(CurriculumKind k);
/// ValidationError listing the valid names on an unknown string.
CurriculumKind parse_curriculum_kind(const std::string& name);

/// Deterministic trial list per kind; identical calls yield bit-identical
/// trials.
std::vector<Trial> make_curriculum(CurriculumKind kind);

/// Line-delimited export (semantics, env, load, frame, agent, label).
std::string export_curriculum(const std::vector<Trial>& trials);

// Fixed contexts shared by the bias experiments.
inline constexpr std::array<double, 3> kAnchorEnv{1.0, 1.0, 0.0};
inline constexpr std::array<double, 3> kConflictEnv{1.0, 0.0, 1.0};
inline constexpr std::array<double, 3> kAmbiguousEnv{1.0, 0.5, 0.7};

}  // namespace dualmind
