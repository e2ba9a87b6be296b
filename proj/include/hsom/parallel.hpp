#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/tree.hpp"

namespace hsom {

struct ParallelConfig {
    std::size_t workers = 0;  // 0 = logical core count
    GrowthConfig growth;
};

/// Work item for one frontier level: a node awaiting vertical growth.
struct PendingNode {
    std::vector<std::size_t> path;  // neuron indices from the root; length == depth - 1
    SomMap som;
    LabeledDataset partition;
    std::size_t depth = 1;
};

namespace detail {

struct TaskFailure {
    std::size_t index = 0;
    std::string message;
};

/// Run fn(0..count-1) on up to `workers` threads and wait for all of them
/// (the level barrier). The first exception wins; its task index and
/// message are reported so the caller can name the failing node. Tasks
/// share nothing but the atomic cursor.
inline std::optional<TaskFailure> run_tasks(std::size_t count, std::size_t workers,
                                            const std::function<void(std::size_t)>& fn) {
    if (count == 0) return std::nullopt;
    const std::size_t n_threads = std::min(std::max<std::size_t>(workers, 1), count);

    std::atomic<std::size_t> cursor{0};
    std::mutex failure_mutex;
    std::optional<TaskFailure> failure;

    auto worker = [&] {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= count) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure) return;  // stop picking up work after a failure
            }
            try {
                fn(i);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = TaskFailure{i, e.what()};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = TaskFailure{i, "unknown worker error"};
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return failure;
}

}  // namespace detail

inline std::size_t resolve_workers(std::size_t requested) {
    if (requested >= 1) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Data-partitioned parallel trainer. Phase 1 (the root SOM) runs on the
/// calling thread; afterwards every frontier node becomes an independent
/// vertical-growth task, a barrier waits out the level, and the
/// coordinator alone merges results and forms the next frontier. Node
/// seeds are path-derived, so the tree is identical to train_sequential's
/// for the same data and growth config regardless of worker count or
/// scheduling order. A failing task aborts the whole training with the
/// node's path; no partial model escapes.
inline HsomModel train_parallel(const LabeledDataset& train, const ParallelConfig& config) {
    validate_dataset(train, "train_parallel");
    if (config.growth.max_depth < 1) throw InvalidInput("train_parallel: max_depth must be >= 1");
    const std::size_t workers = resolve_workers(config.workers);
    const GrowthConfig& growth = config.growth;

    const auto started = std::chrono::steady_clock::now();

    HsomModel model;
    model.config = growth;
    model.feature_dim = train.feature_dim();

    const TrainSchedule root_sched = resolve_schedule(growth.sched, growth.grid, train.size());
    model.root.leaf = false;
    model.root.som = train_som(train.features, growth.grid, root_sched,
                               derive_node_seed(growth.seed, {}));

    struct Slot {
        PendingNode pending;
        HsomNode* node = nullptr;
    };

    std::vector<Slot> frontier;
    frontier.push_back({PendingNode{{}, model.root.som, train, 1}, &model.root});

    while (!frontier.empty()) {
        std::vector<std::vector<ChildDescriptor>> results(frontier.size());
        const auto failure = detail::run_tasks(
            frontier.size(), workers, [&](std::size_t i) {
                const PendingNode& pending = frontier[i].pending;
                results[i] = vertical_growth(pending.som, pending.partition, growth,
                                             pending.depth,
                                             derive_node_seed(growth.seed, pending.path));
            });
        if (failure)
            throw TrainingFailed("worker task failed: " + failure->message,
                                 frontier[failure->index].pending.path);

        // barrier passed; merge on the coordinating thread, in path order
        std::vector<Slot> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            Slot& slot = frontier[i];
            HsomNode& node = *slot.node;
            std::vector<ChildDescriptor>& descriptors = results[i];
            node.children.resize(descriptors.size());
            for (std::size_t k = 0; k < descriptors.size(); ++k) {
                ChildDescriptor& desc = descriptors[k];
                HsomNode& child = node.children[k];
                if (!desc.grown) {
                    child = detail::make_leaf(desc);
                    continue;
                }
                child.leaf = false;
                child.som = std::move(desc.som);
                std::vector<std::size_t> child_path = slot.pending.path;
                child_path.push_back(k);
                next.push_back({PendingNode{std::move(child_path), child.som,
                                            std::move(desc.partition),
                                            slot.pending.depth + 1},
                                &child});
            }
        }
        frontier = std::move(next);
    }

    detail::finalize_model(model);
    model.training_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return model;
}

}  // namespace hsom
