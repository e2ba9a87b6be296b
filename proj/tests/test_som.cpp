#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "hsom/som.hpp"
#include "helpers.hpp"

using namespace hsom;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

SomMap som_with_weights(GridDim dim, const std::vector<std::vector<double>>& rows) {
    SomMap som;
    som.dim = dim;
    som.feature_dim = rows[0].size();
    som.weights = from_rows(rows);
    return som;
}

// Independent oracle: naive argmin over true Euclidean distances with
// lowest-index tie-break. Kept separate from find_bmu on purpose.
std::size_t brute_force_bmu(const SomMap& som, std::span<const double> x) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < som.neuron_count(); ++k) {
        double sum = 0.0;
        for (std::size_t c = 0; c < som.feature_dim; ++c) {
            const double diff = x[c] - som.weights(k, c);
            sum += diff * diff;
        }
        const double dist = std::sqrt(sum);
        if (dist < best_dist) {
            best_dist = dist;
            best = k;
        }
    }
    return best;
}

TrainSchedule sched_for(double alpha0, double delta0, std::size_t iterations,
                        double delta_min = 0.01) {
    TrainSchedule s;
    s.alpha0 = alpha0;
    s.delta0 = delta0;
    s.delta_min = delta_min;
    s.iterations = iterations;
    return s;
}

}  // namespace

TEST_CASE("init_som copies data rows") {
    SECTION("1x1 grid over a single row has only one choice") {
        const Matrix data = from_rows({{5, 5}});
        for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
            const SomMap som = init_som({1, 1}, data, seed);
            REQUIRE(som.weights.row(0)[0] == 5.0);
            REQUIRE(som.weights.row(0)[1] == 5.0);
        }
    }

    SECTION("deterministic for a fixed seed") {
        Rng gen(123);
        Matrix data(50, 3);
        for (double& v : data.storage()) v = gen.uniform01();
        const SomMap a = init_som({3, 2}, data, 7);
        const SomMap b = init_som({3, 2}, data, 7);
        REQUIRE(a == b);
    }

    SECTION("every weight row is a member of the data set") {
        Rng gen(42);
        Matrix data(100, 4);
        for (double& v : data.storage()) v = gen.uniform01();
        const SomMap som = init_som({2, 2}, data, 7);
        for (std::size_t k = 0; k < 4; ++k) {
            bool found = false;
            for (std::size_t r = 0; r < data.rows() && !found; ++r)
                found = std::equal(som.weights.row(k).begin(), som.weights.row(k).end(),
                                   data.row(r).begin());
            REQUIRE(found);
        }
    }

    SECTION("empty data is rejected") {
        REQUIRE_THROWS_AS(init_som({2, 2}, Matrix{}, 0), InvalidInput);
    }
}

TEST_CASE("find_bmu picks the nearest neuron") {
    const SomMap som = som_with_weights({2, 2}, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});

    SECTION("exact match wins") {
        const std::vector<double> x = {1, 0};
        REQUIRE(find_bmu(som, x) == 1);
    }

    SECTION("symmetric tie breaks to the lowest index") {
        const SomMap tied = som_with_weights({2, 1}, {{0, 0}, {2, 0}});
        const std::vector<double> x = {1, 0};
        REQUIRE(find_bmu(tied, x) == 0);
    }

    SECTION("nearest by squared distance") {
        // squared distances: 0.85, 0.05, 1.45, 0.65
        const std::vector<double> x = {0.9, 0.2};
        REQUIRE(find_bmu(som, x) == 1);
    }

    SECTION("dimension mismatch is rejected") {
        const std::vector<double> x = {1, 2, 3};
        REQUIRE_THROWS_AS(find_bmu(som, x), InvalidInput);
    }
}

TEST_CASE("find_bmu agrees with the brute-force oracle on 100 random cases") {
    Rng gen(2024);
    for (int iter = 0; iter < 100; ++iter) {
        const GridDim dim{1 + gen.uniform_index(5), 1 + gen.uniform_index(5)};
        const std::size_t p = 1 + gen.uniform_index(6);
        SomMap som;
        som.dim = dim;
        som.feature_dim = p;
        som.weights = Matrix(dim.neuron_count(), p);
        // coarse values make exact ties frequent, exercising the tie-break
        for (double& v : som.weights.storage())
            v = static_cast<double>(gen.uniform_index(4));
        std::vector<double> x(p);
        for (double& v : x) v = static_cast<double>(gen.uniform_index(4));
        REQUIRE(find_bmu(som, x) == brute_force_bmu(som, x));
    }
}

TEST_CASE("neighborhood kernel") {
    const SomMap som = som_with_weights({2, 2}, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});

    SECTION("is exactly 1 at the BMU") {
        const TrainSchedule s = sched_for(0.5, 2.0, 10);
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t t : {std::size_t{0}, std::size_t{5}, std::size_t{9}})
                REQUIRE(neighborhood(som, b, b, t, s) == 1.0);
    }

    SECTION("grid-adjacent neurons at delta=1 give exp(-1)") {
        const TrainSchedule s = sched_for(0.5, 1.0, 1);
        REQUIRE_THAT(neighborhood(som, 0, 1, 0, s),
                     Catch::Matchers::WithinAbs(0.367879, 1e-6));
    }

    SECTION("wide neighborhood limit approaches 1") {
        const TrainSchedule s = sched_for(0.5, 1e6, 1, 0.01);
        // neurons 0 and 2 of a 3x1 grid: squared grid distance 4
        const SomMap strip = som_with_weights({3, 1}, {{0.0}, {1.0}, {2.0}});
        REQUIRE_THAT(neighborhood(strip, 0, 2, 0, s), Catch::Matchers::WithinAbs(1.0, 1e-5));
    }

    SECTION("range is (0,1] with 1 only at the BMU") {
        Rng gen(5);
        const TrainSchedule s = sched_for(0.5, 1.7, 100);
        for (int iter = 0; iter < 200; ++iter) {
            const std::size_t b = gen.uniform_index(4);
            const std::size_t k = gen.uniform_index(4);
            const std::size_t t = gen.uniform_index(100);
            const double h = neighborhood(som, b, k, t, s);
            REQUIRE(h > 0.0);
            REQUIRE(h <= 1.0);
            REQUIRE((h == 1.0) == (b == k));
        }
    }

    SECTION("index bounds are checked") {
        const TrainSchedule s = sched_for(0.5, 1.0, 10);
        REQUIRE_THROWS_AS(neighborhood(som, 4, 0, 0, s), InvalidInput);
        REQUIRE_THROWS_AS(neighborhood(som, 0, 4, 0, s), InvalidInput);
        REQUIRE_THROWS_AS(neighborhood(som, 0, 0, 10, s), InvalidInput);
    }
}

TEST_CASE("update_weights") {
    SECTION("alpha*h = 1 pulls the BMU exactly onto the sample") {
        SomMap som = som_with_weights({1, 1}, {{3, -2}});
        const std::vector<double> x = {7, 7};
        update_weights(som, x, 0, 0, sched_for(1.0, 1.0, 10));
        REQUIRE(som.weights.row(0)[0] == 7.0);
        REQUIRE(som.weights.row(0)[1] == 7.0);
    }

    SECTION("zero learning rate leaves all weights unchanged") {
        SomMap som = som_with_weights({2, 2}, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
        const SomMap before = som;
        const std::vector<double> x = {0.3, 0.4};
        update_weights(som, x, find_bmu(som, x), 0, sched_for(0.0, 1.0, 10));
        REQUIRE(som == before);
    }

    SECTION("half pull moves the BMU to the midpoint") {
        SomMap som = som_with_weights({1, 1}, {{0, 0}});
        const std::vector<double> x = {2, 2};
        update_weights(som, x, 0, 0, sched_for(0.5, 1.0, 10));
        REQUIRE(som.weights.row(0)[0] == 1.0);
        REQUIRE(som.weights.row(0)[1] == 1.0);
    }

    SECTION("non-finite samples are rejected") {
        SomMap som = som_with_weights({1, 1}, {{0, 0}});
        const std::vector<double> x = {1.0, std::numeric_limits<double>::quiet_NaN()};
        REQUIRE_THROWS_AS(update_weights(som, x, 0, 0, sched_for(0.5, 1.0, 10)), InvalidInput);
    }

    SECTION("the BMU never moves away from the sample") {
        Rng gen(17);
        for (int iter = 0; iter < 100; ++iter) {
            SomMap som;
            som.dim = {2, 2};
            som.feature_dim = 3;
            som.weights = Matrix(4, 3);
            for (double& v : som.weights.storage()) v = gen.uniform01() * 4 - 2;
            std::vector<double> x(3);
            for (double& v : x) v = gen.uniform01() * 4 - 2;
            const TrainSchedule s =
                sched_for(0.01 + 0.99 * gen.uniform01(), 0.5 + gen.uniform01(), 50);
            const std::size_t t = gen.uniform_index(50);
            const std::size_t b = find_bmu(som, x);
            const double before = squared_distance(x, som.weights.row(b));
            update_weights(som, x, b, t, s);
            REQUIRE(squared_distance(x, som.weights.row(b)) <= before + 1e-15);
        }
    }
}

TEST_CASE("train_som") {
    SECTION("zero iterations are rejected") {
        const Matrix data = from_rows({{1, 2}, {3, 4}});
        REQUIRE_THROWS_AS(train_som(data, {1, 1}, sched_for(0.5, 1.0, 0), 1), InvalidInput);
    }

    SECTION("a single iteration performs exactly one update") {
        // one sample, 1x1 grid: init places the weight on the sample, so
        // after exactly one half-pull update it still equals the sample;
        // any deviation would reveal extra or skipped steps
        const Matrix data = from_rows({{4, 8}});
        const SomMap som = train_som(data, {1, 1}, sched_for(0.5, 1.0, 1), 9);
        REQUIRE(som.weights.row(0)[0] == 4.0);
        REQUIRE(som.weights.row(0)[1] == 8.0);

        // and from a distinct start: two data rows force real movement
        const Matrix pair = from_rows({{0, 0}, {8, 8}});
        const SomMap one = train_som(pair, {1, 1}, sched_for(0.5, 1.0, 1), 9);
        const double w0 = one.weights.row(0)[0];
        // one half-pull from either init row toward either sample lands on
        // a multiple of 4
        REQUIRE((w0 == 0.0 || w0 == 4.0 || w0 == 8.0));
    }

    SECTION("deterministic: identical inputs give a bitwise-identical map") {
        const auto blobs = test_helpers::two_blob_data(200, 3);
        const TrainSchedule s = sched_for(0.5, 1.0, 500);
        const SomMap a = train_som(blobs.features, {2, 2}, s, 11);
        const SomMap b = train_som(blobs.features, {2, 2}, s, 11);
        REQUIRE(a == b);
    }

    SECTION("two separated blobs pull a 2x1 grid onto the blob centers") {
        const double sigma = 1.0;
        const auto specs = make_axis_blobs(2, 2, sigma, 20.0);
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            const LabeledDataset data = synth_blobs(1000, specs, seed);
            const SomMap som = train_som(data.features, {2, 1}, sched_for(0.5, 1.0, 5000), seed);
            std::set<std::size_t> matched;  // each weight near a distinct center
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t c = 0; c < 2; ++c)
                    if (std::sqrt(squared_distance(som.weights.row(k), specs[c].center)) <
                        3 * sigma)
                        matched.insert(c);
            REQUIRE(matched.size() == 2);
        }
    }

    SECTION("empty data is rejected") {
        REQUIRE_THROWS_AS(train_som(Matrix{}, {1, 1}, sched_for(0.5, 1.0, 1), 0), InvalidInput);
    }
}

TEST_CASE("map_samples") {
    SECTION("samples equal to weight rows have zero error") {
        const SomMap som = som_with_weights({2, 1}, {{0, 0}, {5, 5}});
        const Matrix data = from_rows({{0, 0}, {5, 5}, {0, 0}});
        const NeuronAssignment a = map_samples(som, data);
        REQUIRE(a.errors[0] == 0.0);
        REQUIRE(a.errors[1] == 0.0);
        REQUIRE(a.members[0].size() == 2);
        REQUIRE(a.members[1].size() == 1);
    }

    SECTION("errors accumulate squared distances") {
        const SomMap som = som_with_weights({1, 1}, {{0}});
        const Matrix data = from_rows({{1}, {-1}});
        const NeuronAssignment a = map_samples(som, data);
        REQUIRE(a.members[0].size() == 2);
        REQUIRE(a.errors[0] == 2.0);
    }

    SECTION("assignment partitions the sample index set") {
        Rng gen(8);
        Matrix data(120, 3);
        for (double& v : data.storage()) v = gen.uniform01();
        const SomMap som = init_som({3, 3}, data, 4);
        const NeuronAssignment a = map_samples(som, data);
        std::set<std::size_t> seen;
        std::size_t total = 0;
        for (const auto& members : a.members) {
            total += members.size();
            seen.insert(members.begin(), members.end());
        }
        REQUIRE(total == 120);
        REQUIRE(seen.size() == 120);
    }

    SECTION("dimension mismatch is rejected") {
        const SomMap som = som_with_weights({1, 1}, {{0, 0}});
        REQUIRE_THROWS_AS(map_samples(som, from_rows({{1}})), InvalidInput);
    }
}

TEST_CASE("quantization_error sums the per-neuron errors") {
    NeuronAssignment a;
    a.errors = {0, 0, 0};
    REQUIRE(quantization_error(a) == 0.0);
    a.errors = {2, 0};
    REQUIRE(quantization_error(a) == 2.0);
    a.errors = {0.5, 1.5, 8};
    REQUIRE(quantization_error(a) == 10.0);
}

TEST_CASE("training reduces quantization error on 2-blob data, 20 seeds") {
    const TrainSchedule s = sched_for(0.5, 1.0, 5000);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const LabeledDataset data = test_helpers::two_blob_data(1000, 1000 + seed);
        const SomMap initial = init_som({2, 2}, data.features, seed);
        const SomMap trained = train_som(data.features, {2, 2}, s, seed);
        const double before = quantization_error(map_samples(initial, data.features));
        const double after = quantization_error(map_samples(trained, data.features));
        REQUIRE(after < before);
    }
}
