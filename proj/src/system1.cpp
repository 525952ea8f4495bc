#include "dualmind/system1.hpp"

#include <cmath>

#include "dualmind/errors.hpp"

namespace dualmind {

const Tensor& System1Params::meta_for(NodeKind agent) const {
    for (const auto& [kind, tensor] : meta) {
        if (kind == agent) return tensor;
    }
    throw IndexError(std::string("system1: no meta-vector for ") +
                     node_kind_name(agent));
}

Tensor& System1Params::meta_for(NodeKind agent) {
    for (auto& [kind, tensor] : meta) {
        if (kind == agent) return tensor;
    }
    throw IndexError(std::string("system1: no meta-vector for ") +
                     node_kind_name(agent));
}

std::vector<Tensor> System1Params::tensors() {
    std::vector<Tensor> out{w_gcn, w_head1, b_head1, w_head2, b_head2};
    for (auto& [kind, tensor] : meta) out.push_back(tensor);
    return out;
}

std::size_t param_count(const DimsConfig& d, std::size_t num_agents) {
    return d.feature_dim * d.hidden_dim +
           (d.hidden_dim + d.meta_dim) * d.head_hidden + d.head_hidden +
           d.head_hidden * d.num_classes + d.num_classes +
           num_agents * d.meta_dim;
}

namespace {

Tensor uniform_init(Rng& rng, Shape shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> v(shape_numel(shape));
    for (double& x : v) x = rng.uniform(-bound, bound);
    Tensor t = Tensor::constant(std::move(shape), std::move(v));
    t.set_requires_grad(true);
    return t;
}

}  // namespace

System1Params init_system1(const DimsConfig& d,
                           const std::vector<NodeKind>& agents, Rng& rng) {
    System1Params p;
    p.w_gcn = uniform_init(rng, {d.feature_dim, d.hidden_dim}, d.feature_dim);
    const std::size_t head_in = d.hidden_dim + d.meta_dim;
    p.w_head1 = uniform_init(rng, {head_in, d.head_hidden}, head_in);
    p.b_head1 = uniform_init(rng, {d.head_hidden}, head_in);
    p.w_head2 = uniform_init(rng, {d.head_hidden, d.num_classes}, d.head_hidden);
    p.b_head2 = uniform_init(rng, {d.num_classes}, d.head_hidden);
    for (NodeKind agent : agents) {
        std::vector<double> v(d.meta_dim);
        for (double& x : v) x = rng.normal(0.0, 0.1);
        Tensor m = Tensor::vector(std::move(v));
        m.set_requires_grad(true);
        p.meta.emplace_back(agent, std::move(m));
    }
    return p;
}

Tensor forward_system1(Tape& tape, const ScenarioGraph& graph, NodeKind agent,
                       const System1Params& params) {
    if (graph.feature_dim() != params.w_gcn.shape()[0]) {
        throw ShapeError("system1: graph features " +
                         shape_str(graph.features.shape()) +
                         " do not match W_gcn " +
                         shape_str(params.w_gcn.shape()));
    }
    const std::size_t agent_row = graph.index_of(agent);
    Tensor mixed = tape.matmul(graph.adjacency_norm, graph.features);
    Tensor h = tape.relu(tape.matmul(mixed, params.w_gcn));
    Tensor h_agent = tape.row(h, agent_row);
    Tensor x = tape.concat(h_agent, params.meta_for(agent));
    Tensor hidden = tape.relu(tape.add(tape.matmul(x, params.w_head1),
                                       params.b_head1));
    return tape.add(tape.matmul(hidden, params.w_head2), params.b_head2);
}

std::vector<double> flatten_params(const System1Params& params) {
    std::vector<double> out;
    auto append = [&out](const Tensor& t) {
        out.insert(out.end(), t.values().begin(), t.values().end());
    };
    append(params.w_gcn);
    append(params.w_head1);
    append(params.b_head1);
    append(params.w_head2);
    append(params.b_head2);
    for (const auto& [kind, tensor] : params.meta) append(tensor);
    return out;
}

System1Params unflatten_params(std::span<const double> flat,
                               const DimsConfig& d,
                               const std::vector<NodeKind>& agents) {
    if (flat.size() != param_count(d, agents.size())) {
        throw ShapeError("unflatten: expected " +
                         std::to_string(param_count(d, agents.size())) +
                         " values, got " + std::to_string(flat.size()));
    }
    std::size_t off = 0;
    auto take = [&](Shape shape) {
        const std::size_t n = shape_numel(shape);
        std::vector<double> v(flat.begin() + off, flat.begin() + off + n);
        off += n;
        return Tensor::constant(std::move(shape), std::move(v));
    };
    System1Params p;
    p.w_gcn = take({d.feature_dim, d.hidden_dim});
    p.w_head1 = take({d.hidden_dim + d.meta_dim, d.head_hidden});
    p.b_head1 = take({d.head_hidden});
    p.w_head2 = take({d.head_hidden, d.num_classes});
    p.b_head2 = take({d.num_classes});
    for (NodeKind agent : agents) {
        p.meta.emplace_back(agent, take({d.meta_dim}));
    }
    return p;
}

System1Params unflatten_on_tape(Tape& tape, const Tensor& flat,
                                const DimsConfig& d,
                                const std::vector<NodeKind>& agents) {
    if (flat.rank() != 1 ||
        flat.numel() != param_count(d, agents.size())) {
        throw ShapeError("unflatten: expected " +
                         std::to_string(param_count(d, agents.size())) +
                         " values, got " + shape_str(flat.shape()));
    }
    std::size_t off = 0;
    auto take = [&](Shape shape) {
        const std::size_t n = shape_numel(shape);
        Tensor piece = tape.slice(flat, off, n);
        off += n;
        return shape.size() == 1 ? piece : tape.reshape(piece, std::move(shape));
    };
    System1Params p;
    p.w_gcn = take({d.feature_dim, d.hidden_dim});
    p.w_head1 = take({d.hidden_dim + d.meta_dim, d.head_hidden});
    p.b_head1 = take({d.head_hidden});
    p.w_head2 = take({d.head_hidden, d.num_classes});
    p.b_head2 = take({d.num_classes});
    for (NodeKind agent : agents) {
        p.meta.emplace_back(agent, take({d.meta_dim}));
    }
    return p;
}

}  // namespace dualmind
