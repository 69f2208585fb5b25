#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <vector>

#include "asist/common.hpp"

namespace asist {

struct KMedoidsResult {
    std::vector<int> medoids;             // ascending item indices
    std::vector<int> assignment;          // item -> position in medoids
    double objective = 0.0;               // sum of distances to assigned medoid
    std::vector<double> objective_trace;  // after init, then after every swap round
};

namespace kmedoids_detail {

inline double assign_all(const Eigen::MatrixXd& dist, const std::vector<int>& medoids,
                         std::vector<int>& assignment) {
    const int n = static_cast<int>(dist.rows());
    assignment.assign(n, 0);
    double objective = 0.0;
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            const double d = dist(i, medoids[m]);
            if (d < best) {
                best = d;
                assignment[i] = static_cast<int>(m);
            }
        }
        objective += best;
    }
    return objective;
}

inline double n_choose_k(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
    return v;
}

}  // namespace kmedoids_detail

// Partitioning around medoids. Tiny instances are solved exactly by
// enumerating all k-subsets; otherwise a greedy build phase (classic PAM
// BUILD, lowest index on ties) is improved by best-improvement swap rounds.
// The objective never increases across swap rounds. `rng` only breaks exact
// ties among equally good swaps.
inline KMedoidsResult k_medoids(const Eigen::MatrixXd& dist, int k, Rng& rng, int max_rounds = 100) {
    const int n = static_cast<int>(dist.rows());
    if (dist.cols() != n) fail("invalid-argument", "k-medoids distance matrix must be square");
    if (k < 1 || k > n) fail("invalid-argument", "k-medoids k out of range");

    KMedoidsResult result;

    if (kmedoids_detail::n_choose_k(n, k) <= 2000.0) {
        std::vector<int> comb(k);
        for (int i = 0; i < k; ++i) comb[i] = i;
        std::vector<int> best_comb;
        double best_obj = std::numeric_limits<double>::infinity();
        std::vector<int> assign;
        while (true) {
            const double obj = kmedoids_detail::assign_all(dist, comb, assign);
            if (obj < best_obj) {
                best_obj = obj;
                best_comb = comb;
            }
            int pos = k - 1;
            while (pos >= 0 && comb[pos] == n - k + pos) --pos;
            if (pos < 0) break;
            ++comb[pos];
            for (int j = pos + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
        }
        result.medoids = best_comb;
        result.objective = kmedoids_detail::assign_all(dist, result.medoids, result.assignment);
        result.objective_trace = {result.objective};
        return result;
    }

    // BUILD: first medoid minimizes total distance, then greedily add the
    // item that lowers the objective most.
    std::vector<int> medoids;
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (int round = 0; round < k; ++round) {
        int best_item = -1;
        double best_obj = std::numeric_limits<double>::infinity();
        for (int cand = 0; cand < n; ++cand) {
            if (std::find(medoids.begin(), medoids.end(), cand) != medoids.end()) continue;
            double obj = 0.0;
            for (int i = 0; i < n; ++i) obj += std::min(nearest[i], dist(i, cand));
            if (obj < best_obj) {
                best_obj = obj;
                best_item = cand;
            }
        }
        medoids.push_back(best_item);
        for (int i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist(i, best_item));
    }
    std::sort(medoids.begin(), medoids.end());

    double objective = kmedoids_detail::assign_all(dist, medoids, result.assignment);
    result.objective_trace.push_back(objective);

    for (int round = 0; round < max_rounds; ++round) {
        double best_delta = -1e-12;
        std::vector<std::pair<int, int>> best_swaps;  // (medoid position, new item)
        std::vector<int> trial = medoids;
        std::vector<int> scratch_assign;
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            for (int cand = 0; cand < n; ++cand) {
                if (std::find(medoids.begin(), medoids.end(), cand) != medoids.end()) continue;
                trial[m] = cand;
                const double obj = kmedoids_detail::assign_all(dist, trial, scratch_assign);
                const double delta = obj - objective;
                if (delta < best_delta - 1e-15) {
                    best_delta = delta;
                    best_swaps = {{static_cast<int>(m), cand}};
                } else if (!best_swaps.empty() && std::abs(delta - best_delta) <= 1e-15) {
                    best_swaps.emplace_back(static_cast<int>(m), cand);
                }
                trial[m] = medoids[m];
            }
        }
        if (best_swaps.empty()) break;
        const auto [m, cand] = best_swaps[rng.uniform_index(best_swaps.size())];
        medoids[m] = cand;
        std::sort(medoids.begin(), medoids.end());
        objective = kmedoids_detail::assign_all(dist, medoids, result.assignment);
        result.objective_trace.push_back(objective);
    }

    result.medoids = medoids;
    result.objective = kmedoids_detail::assign_all(dist, medoids, result.assignment);
    return result;
}

}  // namespace asist
