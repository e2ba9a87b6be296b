#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/matrix.hpp"
#include "hsom/rng.hpp"

namespace hsom {

struct GridDim {
    std::size_t width = 1;
    std::size_t height = 1;

    std::size_t neuron_count() const noexcept { return width * height; }

    /// Integer lattice coordinate of neuron k (row-major: x = k % width).
    std::pair<std::size_t, std::size_t> position(std::size_t k) const noexcept {
        return {k % width, k / width};
    }

    friend bool operator==(const GridDim&, const GridDim&) = default;
};

/// Learning-rate / neighborhood-width schedule for one SOM training run.
/// Both decay linearly over the `iterations` single-sample steps:
///   alpha(t) = alpha0 * (1 - t/T)
///   delta(t) = max(delta_min, delta0 * (1 - t/T))
/// When a schedule travels inside a growth config, delta0 == 0 or
/// iterations == 0 mean "derive from grid size / partition size"; they must
/// be resolved to concrete values before training (see resolve_schedule).
struct TrainSchedule {
    double alpha0 = 0.5;
    double delta0 = 0.0;
    double delta_min = 0.01;
    std::size_t iterations = 0;

    double alpha(std::size_t t) const noexcept {
        return alpha0 * (1.0 - static_cast<double>(t) / static_cast<double>(iterations));
    }
    double delta(std::size_t t) const noexcept {
        return std::max(delta_min,
                        delta0 * (1.0 - static_cast<double>(t) / static_cast<double>(iterations)));
    }

    friend bool operator==(const TrainSchedule&, const TrainSchedule&) = default;
};

inline TrainSchedule resolve_schedule(TrainSchedule sched, GridDim dim, std::size_t n_samples) {
    if (sched.delta0 <= 0.0)
        sched.delta0 = 0.5 * static_cast<double>(std::max(dim.width, dim.height));
    if (sched.iterations == 0)
        sched.iterations = std::min<std::size_t>(10 * n_samples, 100000);
    return sched;
}

inline void validate_schedule(const TrainSchedule& sched) {
    if (!(sched.alpha0 > 0.0) || sched.alpha0 > 1.0)
        throw InvalidInput("schedule: alpha0 must lie in (0, 1]");
    if (!(sched.delta0 > 0.0)) throw InvalidInput("schedule: delta0 must be > 0");
    if (!(sched.delta_min > 0.0)) throw InvalidInput("schedule: delta_min must be > 0");
    if (sched.delta_min > sched.delta0)
        throw InvalidInput("schedule: delta_min must not exceed delta0");
    if (sched.iterations < 1) throw InvalidInput("schedule: iterations must be >= 1");
}

/// One flat SOM: a width x height grid of weight vectors, stored as an
/// M x P matrix (neuron k's weights in row k).
struct SomMap {
    GridDim dim;
    std::size_t feature_dim = 0;
    Matrix weights;  // neuron_count() rows x feature_dim columns

    std::size_t neuron_count() const noexcept { return dim.neuron_count(); }

    friend bool operator==(const SomMap&, const SomMap&) = default;
};

/// Result of mapping a sample set onto a SOM: per neuron, the indices of
/// the samples whose BMU it is and their accumulated squared distance.
struct NeuronAssignment {
    std::vector<std::vector<std::size_t>> members;
    std::vector<double> errors;
};

namespace detail {

inline void require_finite(std::span<const double> x, const char* what) {
    for (double v : x)
        if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " contains a non-finite value");
}

}  // namespace detail

/// Initialize a SOM by drawing one data row per neuron, uniformly with
/// replacement. Keeps the initial weights inside the data's range, which
/// matters after unit-norm preprocessing.
inline SomMap init_som(GridDim dim, const Matrix& data, std::uint64_t seed) {
    if (dim.width < 1 || dim.height < 1) throw InvalidInput("grid dimensions must be >= 1");
    if (data.empty()) throw InvalidInput("init_som: data must contain at least one row");

    SomMap som;
    som.dim = dim;
    som.feature_dim = data.cols();
    som.weights = Matrix(dim.neuron_count(), data.cols());

    Rng rng(seed);
    for (std::size_t k = 0; k < som.neuron_count(); ++k) {
        const std::size_t pick = rng.uniform_index(data.rows());
        auto src = data.row(pick);
        detail::require_finite(src, "init_som: data row");
        auto dst = som.weights.row(k);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return som;
}

/// Index of the neuron whose weight vector is nearest to x (Euclidean).
/// Ties break to the lowest index.
inline std::size_t find_bmu(const SomMap& som, std::span<const double> x) {
    if (x.size() != som.feature_dim)
        throw InvalidInput("find_bmu: sample dimension " + std::to_string(x.size()) +
                           " does not match feature_dim " + std::to_string(som.feature_dim));
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < som.neuron_count(); ++k) {
        const double d = squared_distance(x, som.weights.row(k));
        if (d < best_dist) {
            best_dist = d;
            best = k;
        }
    }
    return best;
}

/// Gaussian neighborhood weight exp(-d2 / delta(t)), where d2 is the
/// squared grid distance between neurons b and k. Equals 1 exactly when
/// k == b and stays in (0, 1] otherwise.
inline double neighborhood(const SomMap& som, std::size_t b, std::size_t k, std::size_t t,
                           const TrainSchedule& sched) {
    if (b >= som.neuron_count() || k >= som.neuron_count())
        throw InvalidInput("neighborhood: neuron index out of range");
    if (t >= sched.iterations) throw InvalidInput("neighborhood: step counter past schedule end");
    const auto [bx, by] = som.dim.position(b);
    const auto [kx, ky] = som.dim.position(k);
    const double dx = static_cast<double>(bx) - static_cast<double>(kx);
    const double dy = static_cast<double>(by) - static_cast<double>(ky);
    return std::exp(-(dx * dx + dy * dy) / sched.delta(t));
}

/// Pull every neuron toward x, scaled by alpha(t) and the neighborhood
/// weight of its grid position relative to the BMU b.
inline void update_weights(SomMap& som, std::span<const double> x, std::size_t b, std::size_t t,
                           const TrainSchedule& sched) {
    if (x.size() != som.feature_dim)
        throw InvalidInput("update_weights: sample dimension mismatch");
    if (b >= som.neuron_count()) throw InvalidInput("update_weights: BMU index out of range");
    if (t >= sched.iterations) throw InvalidInput("update_weights: step counter past schedule end");
    detail::require_finite(x, "update_weights: sample");

    const double alpha = sched.alpha(t);
    for (std::size_t k = 0; k < som.neuron_count(); ++k) {
        const double pull = alpha * neighborhood(som, b, k, t, sched);
        auto w = som.weights.row(k);
        for (std::size_t c = 0; c < som.feature_dim; ++c) w[c] += pull * (x[c] - w[c]);
    }
}

/// Online SOM training: seeded init, then exactly sched.iterations steps of
/// {draw a uniform random sample row; find its BMU; update all weights}.
/// Pure function of (data, dim, sched, seed).
inline SomMap train_som(const Matrix& data, GridDim dim, const TrainSchedule& sched,
                        std::uint64_t seed) {
    if (data.empty()) throw InvalidInput("train_som: data must contain at least one row");
    validate_schedule(sched);

    SomMap som = init_som(dim, data, seed);
    Rng draw(mix64(seed));  // distinct stream from the init draws
    for (std::size_t t = 0; t < sched.iterations; ++t) {
        const std::size_t i = draw.uniform_index(data.rows());
        auto x = data.row(i);
        const std::size_t b = find_bmu(som, x);
        update_weights(som, x, b, t, sched);
    }
    return som;
}

/// Assign every sample to its BMU and accumulate per-neuron squared error.
/// Empty neurons get an empty member list and error 0.
inline NeuronAssignment map_samples(const SomMap& som, const Matrix& data) {
    if (data.cols() != som.feature_dim)
        throw InvalidInput("map_samples: data dimension does not match SOM feature_dim");
    NeuronAssignment out;
    out.members.resize(som.neuron_count());
    out.errors.assign(som.neuron_count(), 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto x = data.row(i);
        const std::size_t b = find_bmu(som, x);
        out.members[b].push_back(i);
        out.errors[b] += squared_distance(x, som.weights.row(b));
    }
    return out;
}

/// Total mapping error: the sum of all per-neuron errors.
inline double quantization_error(const NeuronAssignment& assignment) {
    double total = 0.0;
    for (double e : assignment.errors) total += e;
    return total;
}

}  // namespace hsom
