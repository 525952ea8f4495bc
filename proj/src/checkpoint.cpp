#include "dualmind/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "dualmind/errors.hpp"

namespace dualmind {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;
constexpr const char* kFormat = "dualmind-checkpoint";

json tensor_to_json(const Tensor& t) {
    json shape = json::array();
    for (std::size_t d : t.shape()) shape.push_back(d);
    json values = json::array();
    for (double v : t.values()) values.push_back(double_to_hex(v));
    return json{{"shape", shape}, {"values", values}};
}

Tensor tensor_from_json(const json& j, bool requires_grad) {
    Shape shape;
    for (const auto& d : j.at("shape")) shape.push_back(d.get<std::size_t>());
    std::vector<double> values;
    values.reserve(j.at("values").size());
    for (const auto& v : j.at("values")) {
        values.push_back(hex_to_double(v.get<std::string>()));
    }
    Tensor t = Tensor::constant(std::move(shape), std::move(values));
    t.set_requires_grad(requires_grad);
    return t;
}

}  // namespace

std::string double_to_hex(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double hex_to_double(const std::string& s) {
    return std::strtod(s.c_str(), nullptr);
}

void save_checkpoint(const ModelState& state, const std::string& path) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["dims"] = {{"feature_dim", state.dims.feature_dim},
                 {"hidden_dim", state.dims.hidden_dim},
                 {"meta_dim", state.dims.meta_dim},
                 {"head_hidden", state.dims.head_hidden},
                 {"num_classes", state.dims.num_classes}};
    j["include_bob"] = state.include_bob;
    json agents = json::array();
    for (NodeKind a : state.agents) agents.push_back(node_kind_name(a));
    j["agents"] = agents;
    j["variant"] = variant_name(state.variant);
    j["gate_mode"] = gate_mode_name(state.gate_mode);
    j["phase1_done"] = state.phase1_done;
    j["kappa"] = double_to_hex(state.gate.kappa);

    json tensors;
    tensors["system1.w_gcn"] = tensor_to_json(state.system1.w_gcn);
    tensors["system1.w_head1"] = tensor_to_json(state.system1.w_head1);
    tensors["system1.b_head1"] = tensor_to_json(state.system1.b_head1);
    tensors["system1.w_head2"] = tensor_to_json(state.system1.w_head2);
    tensors["system1.b_head2"] = tensor_to_json(state.system1.b_head2);
    for (const auto& [kind, tensor] : state.system1.meta) {
        tensors[std::string("meta.") + node_kind_name(kind)] =
            tensor_to_json(tensor);
    }
    json theta = json::array();
    for (double v : state.theta_flat) theta.push_back(double_to_hex(v));
    tensors["theta_flat"] = json{{"shape", {state.theta_flat.size()}},
                                 {"values", theta}};
    tensors["controller.w1"] = tensor_to_json(state.controller.w1);
    tensors["controller.b1"] = tensor_to_json(state.controller.b1);
    tensors["controller.w2"] = tensor_to_json(state.controller.w2);
    tensors["controller.b2"] = tensor_to_json(state.controller.b2);
    tensors["gate.w1"] = tensor_to_json(state.gate.w1);
    tensors["gate.b1"] = tensor_to_json(state.gate.b1);
    tensors["gate.w2"] = tensor_to_json(state.gate.w2);
    tensors["gate.b2"] = tensor_to_json(state.gate.b2);
    j["tensors"] = std::move(tensors);

    std::ofstream out(path);
    if (!out) throw IoError("checkpoint: cannot write " + path);
    out << j.dump(1) << "\n";
    if (!out) throw IoError("checkpoint: write failed for " + path);
}

ModelState load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("checkpoint: cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("checkpoint: malformed JSON in " + path + ": " +
                              e.what());
    }
    try {
        if (j.at("format") != kFormat) {
            throw ValidationError("checkpoint: unrecognized format in " + path);
        }
        if (j.at("version") != kVersion) {
            throw ValidationError("checkpoint: unsupported version " +
                                  j.at("version").dump() + " in " + path);
        }
        ModelState state;
        const json& dims = j.at("dims");
        state.dims.feature_dim = dims.at("feature_dim").get<std::size_t>();
        state.dims.hidden_dim = dims.at("hidden_dim").get<std::size_t>();
        state.dims.meta_dim = dims.at("meta_dim").get<std::size_t>();
        state.dims.head_hidden = dims.at("head_hidden").get<std::size_t>();
        state.dims.num_classes = dims.at("num_classes").get<std::size_t>();
        state.include_bob = j.at("include_bob").get<bool>();
        for (const auto& name : j.at("agents")) {
            state.agents.push_back(parse_node_kind(name.get<std::string>()));
        }
        state.variant = parse_variant(j.at("variant").get<std::string>());
        state.gate_mode = parse_gate_mode(j.at("gate_mode").get<std::string>());
        state.phase1_done = j.at("phase1_done").get<bool>();

        const bool meta_trainable = state.variant != Variant::no_meta &&
                                    state.variant != Variant::controller_only;
        const json& tensors = j.at("tensors");
        state.system1.w_gcn = tensor_from_json(tensors.at("system1.w_gcn"), true);
        state.system1.w_head1 =
            tensor_from_json(tensors.at("system1.w_head1"), true);
        state.system1.b_head1 =
            tensor_from_json(tensors.at("system1.b_head1"), true);
        state.system1.w_head2 =
            tensor_from_json(tensors.at("system1.w_head2"), true);
        state.system1.b_head2 =
            tensor_from_json(tensors.at("system1.b_head2"), true);
        for (NodeKind agent : state.agents) {
            state.system1.meta.emplace_back(
                agent,
                tensor_from_json(
                    tensors.at(std::string("meta.") + node_kind_name(agent)),
                    meta_trainable));
        }
        for (const auto& v : tensors.at("theta_flat").at("values")) {
            state.theta_flat.push_back(hex_to_double(v.get<std::string>()));
        }
        state.controller.w1 = tensor_from_json(tensors.at("controller.w1"), true);
        state.controller.b1 = tensor_from_json(tensors.at("controller.b1"), true);
        state.controller.w2 = tensor_from_json(tensors.at("controller.w2"), true);
        state.controller.b2 = tensor_from_json(tensors.at("controller.b2"), true);
        state.gate.w1 = tensor_from_json(tensors.at("gate.w1"), true);
        state.gate.b1 = tensor_from_json(tensors.at("gate.b1"), true);
        state.gate.w2 = tensor_from_json(tensors.at("gate.w2"), true);
        state.gate.b2 = tensor_from_json(tensors.at("gate.b2"), true);
        state.gate.kappa = hex_to_double(j.at("kappa").get<std::string>());
        return state;
    } catch (const json::exception& e) {
        throw ValidationError("checkpoint: missing field in " + path + ": " +
                              e.what());
    }
}

}  // namespace dualmind
