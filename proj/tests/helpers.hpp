#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hsom/dataset.hpp"
#include "hsom/tree.hpp"

namespace test_helpers {

/// Structural tree comparison: same shape, same leaf payloads, weights
/// within tol elementwise (tol 0 demands bitwise equality).
inline bool trees_equal(const hsom::HsomNode& a, const hsom::HsomNode& b, double tol = 0.0) {
    if (a.leaf != b.leaf) return false;
    if (a.leaf) {
        return a.label == b.label && a.sample_count == b.sample_count &&
               a.majority_fraction == b.majority_fraction;
    }
    if (a.som.dim != b.som.dim || a.som.feature_dim != b.som.feature_dim) return false;
    const auto& wa = a.som.weights.storage();
    const auto& wb = b.som.weights.storage();
    if (wa.size() != wb.size()) return false;
    for (std::size_t i = 0; i < wa.size(); ++i)
        if (std::abs(wa[i] - wb[i]) > tol) return false;
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!trees_equal(a.children[i], b.children[i], tol)) return false;
    return true;
}

inline void collect_leaves(const hsom::HsomNode& node, std::vector<const hsom::HsomNode*>& out) {
    if (node.leaf) {
        out.push_back(&node);
        return;
    }
    for (const hsom::HsomNode& child : node.children) collect_leaves(child, out);
}

/// Number of find_bmu hops a sample takes before reaching a leaf.
inline std::size_t descent_hops(const hsom::HsomModel& model, std::span<const double> x) {
    const hsom::HsomNode* node = &model.root;
    std::size_t hops = 0;
    while (!node->leaf) {
        ++hops;
        node = &node->children[hsom::find_bmu(node->som, x)];
    }
    return hops;
}

/// Route every sample down the tree and count arrivals per node, walking
/// the same BMU descent prediction uses. Checks conservation: each
/// internal node's arrivals equal the sum over its children, and every
/// leaf's recorded sample_count matches the routed count.
inline bool counts_conserved(const hsom::HsomModel& model, const hsom::Matrix& train_features) {
    struct Walker {
        static bool walk(const hsom::HsomNode& node, std::vector<std::size_t> samples,
                         const hsom::Matrix& features) {
            if (node.leaf) return node.sample_count == samples.size();
            std::vector<std::vector<std::size_t>> buckets(node.children.size());
            for (std::size_t i : samples)
                buckets[hsom::find_bmu(node.som, features.row(i))].push_back(i);
            std::size_t total = 0;
            for (const auto& bucket : buckets) total += bucket.size();
            if (total != samples.size()) return false;
            for (std::size_t k = 0; k < node.children.size(); ++k)
                if (!walk(node.children[k], std::move(buckets[k]), features)) return false;
            return true;
        }
    };
    std::vector<std::size_t> all(train_features.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return Walker::walk(model.root, std::move(all), train_features);
}

inline hsom::LabeledDataset two_blob_data(std::size_t n, std::uint64_t seed, double sigma = 1.0,
                                          double separation = 20.0, std::size_t dim = 8) {
    const auto blobs = hsom::make_axis_blobs(2, dim, sigma, separation);
    return hsom::synth_blobs(n, blobs, seed);
}

inline hsom::LabeledDataset four_blob_data(std::size_t n, std::uint64_t seed, double sigma = 1.0,
                                           double separation = 10.0, std::size_t dim = 8) {
    const auto blobs = hsom::make_axis_blobs(4, dim, sigma, separation);
    return hsom::synth_blobs(n, blobs, seed);
}

/// Scratch directory under the system temp root, unique per call.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::mt19937_64 gen(std::random_device{}());
    const auto dir = std::filesystem::temp_directory_path() /
                     ("hsom_test_" + tag + "_" + std::to_string(gen()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace test_helpers
