#pragma once

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <vector>

#include "asist/kdtree.hpp"
#include "asist/point_cloud.hpp"

namespace asist {

// Undirected weighted neighborhood graph over cloud points. Adjacency lists
// are kept sorted by neighbor index so every assembly order downstream is
// fixed.
struct Graph {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> adjacency;  // (neighbor, weight)
    std::vector<double> degree;

    [[nodiscard]] Eigen::SparseMatrix<double> omega() const {
        std::vector<Eigen::Triplet<double>> trips;
        for (int p = 0; p < n; ++p)
            for (const auto& [q, w] : adjacency[p]) trips.emplace_back(p, q, w);
        Eigen::SparseMatrix<double> m(n, n);
        m.setFromTriplets(trips.begin(), trips.end());
        return m;
    }
};

// Gaussian-weighted kNN graph, symmetrized by keeping an edge whenever either
// endpoint selects the other as one of its k nearest neighbors.
inline Graph build_knn_graph(const PointCloud& cloud, int k, double sigma) {
    const int n = static_cast<int>(cloud.size());
    if (n <= k) fail("too-few-points", "kNN graph needs more than k=" + std::to_string(k) + " points, got " + std::to_string(n));
    if (!(sigma > 0.0)) fail("invalid-argument", "sigma must be positive");

    const KdTree tree(cloud.points);
    std::vector<std::set<int>> neighbor_sets(n);
    for (int p = 0; p < n; ++p) {
        const auto nbrs = tree.knn(cloud.points[p], k + 1);  // includes p itself at distance 0
        int taken = 0;
        for (const Neighbor& nb : nbrs) {
            if (nb.index == p) continue;
            if (taken == k) break;
            ++taken;
            neighbor_sets[p].insert(nb.index);
            neighbor_sets[nb.index].insert(p);
        }
    }

    Graph graph;
    graph.n = n;
    graph.adjacency.resize(n);
    graph.degree.assign(n, 0.0);
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    for (int p = 0; p < n; ++p) {
        for (int q : neighbor_sets[p]) {
            const double w = std::exp(-(cloud.points[p] - cloud.points[q]).squaredNorm() * inv_two_sigma_sq);
            graph.adjacency[p].emplace_back(q, w);
            graph.degree[p] += w;
        }
    }
    return graph;
}

// Random-walk normalized Laplacian L = I - D^{-1} W; rows sum to zero by
// construction because each off-diagonal row is the degree-normalized weight.
inline Eigen::SparseMatrix<double> laplacian(const Graph& graph) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int p = 0; p < graph.n; ++p) {
        if (!(graph.degree[p] > 0.0))
            fail("isolated-node", "node " + std::to_string(p) + " has zero degree");
        trips.emplace_back(p, p, 1.0);
        for (const auto& [q, w] : graph.adjacency[p]) trips.emplace_back(p, q, -w / graph.degree[p]);
    }
    Eigen::SparseMatrix<double> L(graph.n, graph.n);
    L.setFromTriplets(trips.begin(), trips.end());
    return L;
}

// Connected components by breadth-first search; component ids are assigned in
// order of the smallest node index they contain.
inline std::vector<int> connected_components(const Graph& graph, int* n_components = nullptr) {
    std::vector<int> comp(graph.n, -1);
    int next = 0;
    for (int start = 0; start < graph.n; ++start) {
        if (comp[start] >= 0) continue;
        std::queue<int> frontier;
        frontier.push(start);
        comp[start] = next;
        while (!frontier.empty()) {
            const int p = frontier.front();
            frontier.pop();
            for (const auto& [q, w] : graph.adjacency[p]) {
                (void)w;
                if (comp[q] < 0) {
                    comp[q] = next;
                    frontier.push(q);
                }
            }
        }
        ++next;
    }
    if (n_components) *n_components = next;
    return comp;
}

}  // namespace asist
