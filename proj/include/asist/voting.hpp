#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "asist/common.hpp"

namespace asist {

struct VotingResult {
    Eigen::VectorXd v;
    std::vector<double> energies;  // objective after each accepted update, non-increasing
    int pg_iterations = 0;
    double pg_residual = 0.0;
};

namespace voting_detail {

inline double vote_objective(const Eigen::MatrixXd& q, const Eigen::VectorXd& mass,
                             double lambda5, double lambda6, const Eigen::VectorXd& v) {
    return lambda6 * v.dot(q * v) - lambda5 * mass.dot(v);
}

// Coordinate sweeps toward box corners.  The objective is linear in each
// coordinate (the overlap matrix has a zero diagonal), so per-coordinate
// minima sit at 0 or 1; interior coordinates snap even on ties, corner
// coordinates move only on strict improvement, so the sweeps terminate.
inline Eigen::VectorXd corner_sweeps(const Eigen::MatrixXd& q, const Eigen::VectorXd& mass,
                                     double lambda5, double lambda6, Eigen::VectorXd v) {
    const Eigen::Index n = v.size();
    bool changed = true;
    while (changed) {
        changed = false;
        for (Eigen::Index e = 0; e < n; ++e) {
            const double slope = 2.0 * lambda6 * q.row(e).dot(v) - lambda5 * mass(e);
            double target = v(e);
            if (slope > 0.0)
                target = 0.0;
            else if (slope < 0.0)
                target = 1.0;
            else if (v(e) != 0.0 && v(e) != 1.0)
                target = mass(e) > 0.0 ? 1.0 : 0.0;
            if (target != v(e)) {
                v(e) = target;
                changed = true;
            }
        }
    }
    return v;
}

// Improvement pass over corner configurations: try switching one instance on
// while switching off every selected instance it overlaps with.
inline Eigen::VectorXd swap_search(const Eigen::MatrixXd& q, const Eigen::VectorXd& mass,
                                   double lambda5, double lambda6, Eigen::VectorXd v) {
    const Eigen::Index n = v.size();
    bool improved = true;
    while (improved) {
        improved = false;
        for (Eigen::Index e = 0; e < n; ++e) {
            if (v(e) == 1.0) continue;
            Eigen::VectorXd candidate = v;
            candidate(e) = 1.0;
            for (Eigen::Index o = 0; o < n; ++o)
                if (o != e && q(e, o) != 0.0 && candidate(o) == 1.0) candidate(o) = 0.0;
            if (vote_objective(q, mass, lambda5, lambda6, candidate) <
                vote_objective(q, mass, lambda5, lambda6, v) - 1e-15) {
                v = candidate;
                improved = true;
            }
        }
    }
    return v;
}

inline Eigen::VectorXd best_corner(const Eigen::MatrixXd& q, const Eigen::VectorXd& mass,
                                   double lambda5, double lambda6) {
    const Eigen::Index n = mass.size();
    Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
    double best_val = vote_objective(q, mass, lambda5, lambda6, best);
    Eigen::VectorXd v(n);
    for (std::uint64_t bits = 1; bits < (1ULL << n); ++bits) {
        for (Eigen::Index e = 0; e < n; ++e) v(e) = (bits >> e) & 1ULL ? 1.0 : 0.0;
        const double val = vote_objective(q, mass, lambda5, lambda6, v);
        if (val < best_val) {
            best_val = val;
            best = v;
        }
    }
    return best;
}

}  // namespace voting_detail

// Vote update: minimize lambda6 v'Qv - lambda5 mass'v over the unit box.
// Projected gradient descends from the warm start; because a huge lambda6
// turns the problem into a combinatorial selection whose minima sit at box
// corners, the descent is followed by a corner refinement (exhaustive when
// small enough, coordinate sweeps plus swap search otherwise) and the better
// of the two results is returned.
inline VotingResult voting_step(const Eigen::MatrixXd& q, const Eigen::VectorXd& mass,
                                double lambda5, double lambda6, Eigen::VectorXd v_warm,
                                int max_iters = 10000, double tol = 1e-8) {
    const Eigen::Index n = mass.size();
    if (q.rows() != n || q.cols() != n) fail("invalid-argument", "overlap matrix size mismatch");
    if (v_warm.size() != n) fail("invalid-argument", "warm start size mismatch");

    VotingResult out;
    if (n == 0) {
        out.v = v_warm;
        return out;
    }
    v_warm = v_warm.cwiseMax(0.0).cwiseMin(1.0);

    double q_one_norm = 0.0;
    for (Eigen::Index c = 0; c < n; ++c)
        q_one_norm = std::max(q_one_norm, q.col(c).cwiseAbs().sum());
    const double step = 1.0 / (2.0 * lambda6 * q_one_norm + lambda5 * mass.maxCoeff() + 1e-12);

    Eigen::VectorXd v = v_warm;
    out.energies.push_back(voting_detail::vote_objective(q, mass, lambda5, lambda6, v));
    for (int it = 0; it < max_iters; ++it) {
        const Eigen::VectorXd grad = 2.0 * lambda6 * (q * v) - lambda5 * mass;
        const Eigen::VectorXd next = (v - step * grad).cwiseMax(0.0).cwiseMin(1.0);
        out.pg_residual = (next - v).lpNorm<Eigen::Infinity>();
        out.pg_iterations = it + 1;
        v = next;
        out.energies.push_back(voting_detail::vote_objective(q, mass, lambda5, lambda6, v));
        if (out.pg_residual <= tol) break;
    }
    const double pg_energy = voting_detail::vote_objective(q, mass, lambda5, lambda6, v);

    Eigen::VectorXd corner = voting_detail::corner_sweeps(q, mass, lambda5, lambda6, v);
    corner = voting_detail::swap_search(q, mass, lambda5, lambda6, corner);
    if (n <= 16) {
        const Eigen::VectorXd exhaustive = voting_detail::best_corner(q, mass, lambda5, lambda6);
        if (voting_detail::vote_objective(q, mass, lambda5, lambda6, exhaustive) <
            voting_detail::vote_objective(q, mass, lambda5, lambda6, corner))
            corner = exhaustive;
    }
    const double corner_energy = voting_detail::vote_objective(q, mass, lambda5, lambda6, corner);

    const bool take_corner =
        corner_energy < pg_energy || (out.pg_residual > tol && corner_energy <= pg_energy);
    out.v = take_corner ? corner : v;
    if (take_corner && corner_energy <= pg_energy) out.energies.push_back(corner_energy);
    return out;
}

}  // namespace asist
