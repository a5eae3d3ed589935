#pragma once

#include "simlab/simlab.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace simlab::testing {

inline std::string scenario_path(const std::string& file) { return std::string(SIMLAB_SCENARIO_DIR) + "/" + file; }

/// A = [[0,0],[1,0]], b = [1,0]: the leader pins follower 1, which feeds 2.
inline DirectedTopology two_node() {
    DirectedTopology t;
    t.adjacency = Matrix::Zero(2, 2);
    t.adjacency(1, 0) = 1.0;
    t.pinning = Vector::Zero(2);
    t.pinning(0) = 1.0;
    return t;
}

/// 1 -> 2 -> ... -> n with the leader pinning follower 1.
inline DirectedTopology chain(int n) {
    DirectedTopology t;
    t.adjacency = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) t.adjacency(i, i - 1) = 1.0;
    t.pinning = Vector::Zero(n);
    t.pinning(0) = 1.0;
    return t;
}

/// Random topology in which every follower is reachable: a random spanning
/// tree rooted at pinned nodes, plus random extra edges and pins.
inline DirectedTopology random_reachable(std::mt19937_64& rng, int max_n) {
    std::uniform_int_distribution<int> size(1, max_n);
    std::uniform_real_distribution<double> weight(0.2, 3.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const int n = size(rng);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);

    DirectedTopology t;
    t.adjacency = Matrix::Zero(n, n);
    t.pinning = Vector::Zero(n);
    t.pinning(order[0]) = weight(rng);
    for (int k = 1; k < n; ++k) {
        std::uniform_int_distribution<int> parent(0, k - 1);
        t.adjacency(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(parent(rng))]) = weight(rng);
    }
    for (int i = 0; i < n; ++i) {
        if (coin(rng) < 0.2) t.pinning(i) = weight(rng);
        for (int j = 0; j < n; ++j)
            if (i != j && coin(rng) < 0.25) t.adjacency(i, j) = weight(rng);
    }
    return t;
}

/// Random connected undirected topology (symmetric weights) with at least
/// one pinned node.
inline DirectedTopology random_undirected(std::mt19937_64& rng, int max_n) {
    std::uniform_int_distribution<int> size(1, max_n);
    std::uniform_real_distribution<double> weight(0.2, 3.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const int n = size(rng);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);

    DirectedTopology t;
    t.adjacency = Matrix::Zero(n, n);
    t.pinning = Vector::Zero(n);
    t.pinning(order[0]) = weight(rng);
    auto link = [&](int a, int b) { t.adjacency(a, b) = t.adjacency(b, a) = weight(rng); };
    for (int k = 1; k < n; ++k) {
        std::uniform_int_distribution<int> parent(0, k - 1);
        link(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(parent(rng))]);
    }
    for (int i = 0; i < n; ++i) {
        if (coin(rng) < 0.2) t.pinning(i) = weight(rng);
        for (int j = i + 1; j < n; ++j)
            if (coin(rng) < 0.25) link(i, j);
    }
    return t;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("simlab_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace simlab::testing
