#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/matrix.hpp"
#include "hsom/rng.hpp"

namespace hsom {

/// Feature matrix plus binary labels. Label 0 = benign, 1 = malicious.
struct LabeledDataset {
    Matrix features;
    std::vector<std::uint8_t> labels;
    std::vector<std::string> feature_names;  // optional; empty when unknown

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t feature_dim() const noexcept { return features.cols(); }

    /// Fraction of malicious (label 1) rows.
    double contamination() const {
        if (labels.empty()) return 0.0;
        const double ones = static_cast<double>(
            std::accumulate(labels.begin(), labels.end(), std::size_t{0}));
        return ones / static_cast<double>(labels.size());
    }

    LabeledDataset gather(std::span<const std::size_t> indices) const {
        LabeledDataset out;
        out.features = features.gather_rows(indices);
        out.labels.reserve(indices.size());
        for (std::size_t i : indices) out.labels.push_back(labels[i]);
        out.feature_names = feature_names;
        return out;
    }
};

inline void validate_dataset(const LabeledDataset& ds, const char* what) {
    if (ds.size() == 0) throw InvalidInput(std::string(what) + ": dataset is empty");
    if (ds.labels.size() != ds.size())
        throw InvalidInput(std::string(what) + ": label count does not match row count");
    for (std::uint8_t label : ds.labels)
        if (label > 1) throw InvalidInput(std::string(what) + ": labels must be 0 or 1");
}

/// Scale every nonzero row to unit Euclidean norm. All-zero rows pass
/// through unchanged; labels are untouched. Idempotent.
inline LabeledDataset normalize_l2(LabeledDataset ds) {
    for (std::size_t r = 0; r < ds.features.rows(); ++r) {
        auto row = ds.features.row(r);
        double norm2 = 0.0;
        for (double v : row) norm2 += v * v;
        if (norm2 == 0.0) continue;
        const double norm = std::sqrt(norm2);
        for (double& v : row) v /= norm;
    }
    return ds;
}

struct SplitPair {
    LabeledDataset train;
    LabeledDataset test;
    std::uint64_t seed = 0;
    double ratio = 0.8;
};

/// Seeded uniform shuffle split: the first floor(ratio * N) shuffled rows
/// form the training set, the remainder the test set. The same seed always
/// produces the same partition, so competing trainers can share one split.
inline SplitPair split_train_test(const LabeledDataset& ds, double ratio, std::uint64_t seed) {
    validate_dataset(ds, "split_train_test");
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("split_train_test: ratio must lie in (0, 1)");
    if (ds.size() < 2) throw InvalidInput("split_train_test: need at least two rows");

    const std::size_t n = ds.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {  // Fisher-Yates
        const std::size_t j = rng.uniform_index(i + 1);
        std::swap(order[i], order[j]);
    }

    const std::size_t n_train = static_cast<std::size_t>(ratio * static_cast<double>(n));
    if (n_train == 0 || n_train == n)
        throw InvalidInput("split_train_test: split leaves one side empty");

    SplitPair out;
    out.seed = seed;
    out.ratio = ratio;
    out.train = ds.gather({order.data(), n_train});
    out.test = ds.gather({order.data() + n_train, n - n_train});
    return out;
}

/// One Gaussian cluster for the synthetic generator.
struct BlobSpec {
    std::vector<double> center;
    double sigma = 1.0;
    std::uint8_t label = 0;
};

/// k axis-aligned blob specs with alternating labels: blob i sits at
/// (i + 1) * separation * sigma along feature axis i mod dim, so any two
/// centers are at least separation * sigma apart.
inline std::vector<BlobSpec> make_axis_blobs(std::size_t k, std::size_t dim, double sigma,
                                             double separation) {
    if (k < 1) throw InvalidInput("make_axis_blobs: need at least one blob");
    if (dim < 1) throw InvalidInput("make_axis_blobs: dim must be >= 1");
    if (!(sigma > 0.0)) throw InvalidInput("make_axis_blobs: sigma must be > 0");
    if (!(separation > 0.0)) throw InvalidInput("make_axis_blobs: separation must be > 0");
    std::vector<BlobSpec> blobs(k);
    for (std::size_t i = 0; i < k; ++i) {
        blobs[i].center.assign(dim, 0.0);
        blobs[i].center[i % dim] = static_cast<double>(i + 1) * separation * sigma;
        blobs[i].sigma = sigma;
        blobs[i].label = static_cast<std::uint8_t>(i % 2);
    }
    return blobs;
}

/// n seeded Gaussian samples assigned round-robin across the blobs, with
/// the blob's ground-truth label attached. Deterministic for a fixed seed.
inline LabeledDataset synth_blobs(std::size_t n, std::span<const BlobSpec> blobs,
                                  std::uint64_t seed) {
    if (blobs.empty()) throw InvalidInput("synth_blobs: need at least one blob");
    if (n < blobs.size()) throw InvalidInput("synth_blobs: n must be >= number of blobs");
    const std::size_t dim = blobs.front().center.size();
    if (dim == 0) throw InvalidInput("synth_blobs: blob centers must be non-empty");
    for (const BlobSpec& blob : blobs) {
        if (blob.center.size() != dim)
            throw InvalidInput("synth_blobs: all blob centers must share one dimension");
        if (!(blob.sigma > 0.0)) throw InvalidInput("synth_blobs: sigma must be > 0");
        if (blob.label > 1) throw InvalidInput("synth_blobs: labels must be 0 or 1");
    }

    LabeledDataset out;
    out.features = Matrix(n, dim);
    out.labels.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const BlobSpec& blob = blobs[i % blobs.size()];
        auto row = out.features.row(i);
        for (std::size_t d = 0; d < dim; ++d)
            row[d] = blob.center[d] + blob.sigma * rng.gaussian();
        out.labels[i] = blob.label;
    }
    return out;
}

}  // namespace hsom
