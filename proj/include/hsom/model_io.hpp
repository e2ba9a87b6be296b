#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hsom/errors.hpp"
#include "hsom/tree.hpp"

namespace hsom {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json node_to_json(const HsomNode& node) {
    if (node.leaf) {
        return {{"kind", "leaf"},
                {"label", static_cast<int>(node.label)},
                {"sample_count", node.sample_count},
                {"majority_fraction", node.majority_fraction}};
    }
    nlohmann::json weights = nlohmann::json::array();
    for (std::size_t k = 0; k < node.som.neuron_count(); ++k) {
        auto row = node.som.weights.row(k);
        weights.push_back(std::vector<double>(row.begin(), row.end()));
    }
    nlohmann::json children = nlohmann::json::array();
    for (const HsomNode& child : node.children) children.push_back(node_to_json(child));
    return {{"kind", "som"},
            {"width", node.som.dim.width},
            {"height", node.som.dim.height},
            {"weights", std::move(weights)},
            {"children", std::move(children)}};
}

inline HsomNode node_from_json(const nlohmann::json& j, std::size_t feature_dim) {
    HsomNode node;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "leaf") {
        node.leaf = true;
        const int label = j.at("label").get<int>();
        if (label != 0 && label != 1) throw InvalidInput("model: leaf label must be 0 or 1");
        node.label = static_cast<std::uint8_t>(label);
        node.sample_count = j.at("sample_count").get<std::size_t>();
        node.majority_fraction = j.at("majority_fraction").get<double>();
        return node;
    }
    if (kind != "som") throw InvalidInput("model: unknown node kind '" + kind + "'");

    node.leaf = false;
    node.som.dim = {j.at("width").get<std::size_t>(), j.at("height").get<std::size_t>()};
    node.som.feature_dim = feature_dim;
    const auto& weights = j.at("weights");
    if (weights.size() != node.som.neuron_count())
        throw InvalidInput("model: weight row count does not match grid size");
    node.som.weights = Matrix(node.som.neuron_count(), feature_dim);
    for (std::size_t k = 0; k < node.som.neuron_count(); ++k) {
        const auto& row = weights.at(k);
        if (row.size() != feature_dim)
            throw InvalidInput("model: weight row length does not match feature_dim");
        auto dst = node.som.weights.row(k);
        for (std::size_t c = 0; c < feature_dim; ++c) dst[c] = row.at(c).get<double>();
    }
    const auto& children = j.at("children");
    if (children.size() != node.som.neuron_count())
        throw InvalidInput("model: child count does not match grid size");
    node.children.reserve(children.size());
    for (const auto& child : children) node.children.push_back(node_from_json(child, feature_dim));
    return node;
}

}  // namespace detail

/// Self-describing JSON tree document. Weights are written in the shortest
/// form that reparses to the identical double, so a round trip is lossless.
/// Timing is deliberately not stored: the same tree serializes to the same
/// bytes however long it took to train.
inline nlohmann::json model_to_json(const HsomModel& model) {
    return {{"format", "hsom-model"},
            {"format_version", kModelFormatVersion},
            {"feature_dim", model.feature_dim},
            {"depth", model.depth},
            {"node_count", model.node_count},
            {"config",
             {{"tau", model.config.tau},
              {"max_depth", model.config.max_depth},
              {"grid", {{"width", model.config.grid.width}, {"height", model.config.grid.height}}},
              {"schedule",
               {{"alpha0", model.config.sched.alpha0},
                {"delta0", model.config.sched.delta0},
                {"delta_min", model.config.sched.delta_min},
                {"iterations", model.config.sched.iterations}}},
              {"seed", model.config.seed}}},
            {"root", detail::node_to_json(model.root)}};
}

inline HsomModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "hsom-model") throw InvalidInput("model: not a model document");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw InvalidInput("model: unsupported format version " + std::to_string(version));

    HsomModel model;
    model.feature_dim = j.at("feature_dim").get<std::size_t>();
    const auto& config = j.at("config");
    model.config.tau = config.at("tau").get<double>();
    model.config.max_depth = config.at("max_depth").get<std::size_t>();
    model.config.grid = {config.at("grid").at("width").get<std::size_t>(),
                         config.at("grid").at("height").get<std::size_t>()};
    const auto& sched = config.at("schedule");
    model.config.sched.alpha0 = sched.at("alpha0").get<double>();
    model.config.sched.delta0 = sched.at("delta0").get<double>();
    model.config.sched.delta_min = sched.at("delta_min").get<double>();
    model.config.sched.iterations = sched.at("iterations").get<std::size_t>();
    model.config.seed = config.at("seed").get<std::uint64_t>();
    model.root = detail::node_from_json(j.at("root"), model.feature_dim);
    detail::finalize_model(model);
    return model;
}

inline void save_model(const HsomModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << model_to_json(model).dump(2) << '\n';
    if (!out) throw IoError("failed while writing " + path.string());
}

inline HsomModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

}  // namespace hsom
