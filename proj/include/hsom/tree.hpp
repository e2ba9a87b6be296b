#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hsom/dataset.hpp"
#include "hsom/errors.hpp"
#include "hsom/som.hpp"

namespace hsom {

/// Parameters governing hierarchy growth. `sched` may carry the auto
/// sentinels (delta0 == 0, iterations == 0); they are resolved per node
/// from the grid and the node's partition size.
struct GrowthConfig {
    double tau = 1.0;          // growth-threshold multiplier on the mean neuron error
    std::size_t max_depth = 8; // cap on SOM levels; the root is level 1
    GridDim grid;
    TrainSchedule sched;
    std::uint64_t seed = 0;

    friend bool operator==(const GrowthConfig&, const GrowthConfig&) = default;
};

/// Tree node: an internal node holds a SOM plus one child per neuron; a
/// leaf holds a binary label with the vote that produced it.
struct HsomNode {
    bool leaf = true;

    // internal
    SomMap som;
    std::vector<HsomNode> children;  // exactly som.neuron_count() entries

    // leaf
    std::uint8_t label = 0;
    std::size_t sample_count = 0;
    double majority_fraction = 1.0;  // 1 for empty-inherited leaves
};

struct HsomModel {
    HsomNode root;
    GrowthConfig config;
    std::size_t feature_dim = 0;
    std::size_t depth = 1;       // SOM levels on the deepest root-to-leaf path
    std::size_t node_count = 1;  // internal nodes + leaves
    double training_time_s = 0.0;
};

/// Error cutoff for growing: tau times the mean per-neuron error.
inline double compute_growth_threshold(const NeuronAssignment& assignment, double tau) {
    return tau * quantization_error(assignment) / static_cast<double>(assignment.errors.size());
}

struct LeafLabel {
    std::uint8_t label = 1;
    double majority_fraction = 1.0;
};

/// Majority vote over a neuron's sample labels; a tie labels malicious.
/// For an empty list the caller substitutes the parent partition's
/// majority, so the value returned here is never used for one.
inline LeafLabel label_leaf(std::span<const std::uint8_t> labels) {
    if (labels.empty()) return {1, 1.0};
    std::size_t ones = 0;
    for (std::uint8_t v : labels) ones += v;
    const std::size_t zeros = labels.size() - ones;
    LeafLabel out;
    out.label = ones >= zeros ? 1 : 0;
    const std::size_t winner = std::max(ones, zeros);
    out.majority_fraction = static_cast<double>(winner) / static_cast<double>(labels.size());
    return out;
}

/// Per-neuron verdict from one vertical-growth pass.
struct ChildDescriptor {
    bool grown = false;

    // grown: a freshly trained child SOM plus the sub-partition it owns
    SomMap som;
    LabeledDataset partition;

    // leaf
    std::uint8_t label = 0;
    std::size_t sample_count = 0;
    double majority_fraction = 1.0;
};

/// One growth step: map the partition onto the parent SOM, compare each
/// neuron's error against tau * mean, and per neuron either train a child
/// SOM on its samples or emit a labeled leaf. A neuron grows only when its
/// error strictly exceeds the threshold, it holds more samples than the
/// grid has neurons, and the depth cap leaves room for another level.
/// Empty neurons become leaves inheriting the partition's majority label.
inline std::vector<ChildDescriptor> vertical_growth(const SomMap& parent_som,
                                                    const LabeledDataset& partition,
                                                    const GrowthConfig& config, std::size_t depth,
                                                    std::uint64_t node_seed) {
    if (partition.feature_dim() != parent_som.feature_dim)
        throw InvalidInput("vertical_growth: partition dimension does not match SOM");
    validate_dataset(partition, "vertical_growth");

    const NeuronAssignment assignment = map_samples(parent_som, partition.features);
    const double threshold = compute_growth_threshold(assignment, config.tau);
    const std::size_t grid_size = config.grid.neuron_count();
    const std::uint8_t parent_majority = label_leaf(partition.labels).label;

    std::vector<ChildDescriptor> out(parent_som.neuron_count());
    for (std::size_t k = 0; k < parent_som.neuron_count(); ++k) {
        const std::vector<std::size_t>& members = assignment.members[k];
        ChildDescriptor& child = out[k];
        if (members.empty()) {
            child.label = parent_majority;
            child.sample_count = 0;
            child.majority_fraction = 1.0;
            continue;
        }
        const bool grow = assignment.errors[k] > threshold && members.size() > grid_size &&
                          depth < config.max_depth;
        if (grow) {
            child.grown = true;
            child.partition = partition.gather(members);
            const TrainSchedule sched =
                resolve_schedule(config.sched, config.grid, members.size());
            child.som = train_som(child.partition.features, config.grid, sched,
                                  derive_child_seed(node_seed, k));
        } else {
            std::vector<std::uint8_t> member_labels;
            member_labels.reserve(members.size());
            for (std::size_t i : members) member_labels.push_back(partition.labels[i]);
            const LeafLabel vote = label_leaf(member_labels);
            child.label = vote.label;
            child.sample_count = members.size();
            child.majority_fraction = vote.majority_fraction;
        }
    }
    return out;
}

namespace detail {

inline HsomNode make_leaf(const ChildDescriptor& desc) {
    HsomNode node;
    node.leaf = true;
    node.label = desc.label;
    node.sample_count = desc.sample_count;
    node.majority_fraction = desc.majority_fraction;
    return node;
}

inline void accumulate_stats(const HsomNode& node, std::size_t depth, std::size_t& max_depth,
                             std::size_t& count) {
    ++count;
    if (node.leaf) return;
    if (depth > max_depth) max_depth = depth;
    for (const HsomNode& child : node.children)
        accumulate_stats(child, depth + 1, max_depth, count);
}

inline void finalize_model(HsomModel& model) {
    model.depth = 1;
    model.node_count = 0;
    accumulate_stats(model.root, 1, model.depth, model.node_count);
}

}  // namespace detail

/// Train the full hierarchy in one thread: root SOM on all training
/// features, then level-by-level vertical growth over the pending frontier
/// in path order until every branch ends in a leaf.
inline HsomModel train_sequential(const LabeledDataset& train, const GrowthConfig& config) {
    validate_dataset(train, "train_sequential");
    if (config.max_depth < 1) throw InvalidInput("train_sequential: max_depth must be >= 1");

    const auto started = std::chrono::steady_clock::now();

    HsomModel model;
    model.config = config;
    model.feature_dim = train.feature_dim();

    const TrainSchedule root_sched = resolve_schedule(config.sched, config.grid, train.size());
    model.root.leaf = false;
    model.root.som = train_som(train.features, config.grid, root_sched,
                               derive_node_seed(config.seed, {}));

    struct Pending {
        std::vector<std::size_t> path;
        HsomNode* node;
        LabeledDataset partition;
        std::size_t depth;
    };

    std::vector<Pending> frontier;
    frontier.push_back({{}, &model.root, train, 1});

    while (!frontier.empty()) {
        std::vector<Pending> next;
        for (Pending& pending : frontier) {
            const std::uint64_t node_seed = derive_node_seed(config.seed, pending.path);
            std::vector<ChildDescriptor> descriptors = vertical_growth(
                pending.node->som, pending.partition, config, pending.depth, node_seed);
            pending.node->children.resize(descriptors.size());
            for (std::size_t k = 0; k < descriptors.size(); ++k) {
                ChildDescriptor& desc = descriptors[k];
                HsomNode& slot = pending.node->children[k];
                if (!desc.grown) {
                    slot = detail::make_leaf(desc);
                    continue;
                }
                slot.leaf = false;
                slot.som = std::move(desc.som);
                std::vector<std::size_t> child_path = pending.path;
                child_path.push_back(k);
                next.push_back({std::move(child_path), &slot, std::move(desc.partition),
                                pending.depth + 1});
            }
        }
        frontier = std::move(next);
    }

    detail::finalize_model(model);
    model.training_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return model;
}

/// Classify one sample by descending the hierarchy: at each internal node
/// follow the BMU's child until a leaf supplies the label.
inline std::uint8_t predict(const HsomModel& model, std::span<const double> x) {
    if (x.size() != model.feature_dim)
        throw InvalidInput("predict: sample dimension " + std::to_string(x.size()) +
                           " does not match model feature_dim " +
                           std::to_string(model.feature_dim));
    const HsomNode* node = &model.root;
    while (!node->leaf) {
        const std::size_t b = find_bmu(node->som, x);
        node = &node->children[b];
    }
    return node->label;
}

inline std::vector<std::uint8_t> predict_all(const HsomModel& model, const Matrix& samples) {
    std::vector<std::uint8_t> out;
    out.reserve(samples.rows());
    for (std::size_t i = 0; i < samples.rows(); ++i) out.push_back(predict(model, samples.row(i)));
    return out;
}

}  // namespace hsom
