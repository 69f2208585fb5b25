#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "asist/common.hpp"
#include "asist/graph.hpp"

namespace asist {

struct SpectralBasis {
    Eigen::MatrixXd phi;   // n_p x n_b, columns unit Euclidean norm
    Eigen::VectorXd mu;    // eigenvalues ascending, zeros first
    Eigen::VectorXd beta;  // phi * beta == all-ones
    int n_components = 1;
};

namespace spectral_detail {

inline Eigen::SparseMatrix<double> symmetric_laplacian(const Graph& graph) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int p = 0; p < graph.n; ++p) {
        trips.emplace_back(p, p, 1.0);
        const double dp = graph.degree[p];
        for (const auto& [q, w] : graph.adjacency[p])
            trips.emplace_back(p, q, -w / std::sqrt(dp * graph.degree[q]));
    }
    Eigen::SparseMatrix<double> L(graph.n, graph.n);
    L.setFromTriplets(trips.begin(), trips.end());
    return L;
}

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best) {
            best = a;
            arg = i;
        }
    }
    if (v[arg] < 0.0) v = -v;
}

// Lanczos with full reorthogonalization on M = (L_sym + shift*I)^{-1},
// deflated against the columns of null_basis (an invariant subspace of M).
// Returns the `want` largest Ritz pairs of M as (theta, vector) with vectors
// orthonormal and orthogonal to null_basis.
inline bool shift_invert_lanczos(const Eigen::SparseMatrix<double>& L_sym, double shift,
                                 const Eigen::MatrixXd& null_basis, int want, int steps, Rng& rng,
                                 Eigen::VectorXd& thetas, Eigen::MatrixXd& vectors) {
    const int n = static_cast<int>(L_sym.rows());
    Eigen::SparseMatrix<double> shifted = L_sym;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
    if (solver.info() != Eigen::Success) return false;

    auto deflate = [&](Eigen::VectorXd& v) {
        if (null_basis.cols() > 0) v -= null_basis * (null_basis.transpose() * v);
    };

    Eigen::MatrixXd V(n, steps);
    Eigen::VectorXd alpha(steps), gamma(steps);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform() - 0.5;
    deflate(v);
    if (v.norm() < 1e-12) return false;
    v.normalize();

    int m = 0;
    for (int j = 0; j < steps; ++j) {
        V.col(j) = v;
        Eigen::VectorXd w = solver.solve(v);
        deflate(w);
        alpha[j] = v.dot(w);
        w -= alpha[j] * v;
        if (j > 0) w -= gamma[j - 1] * V.col(j - 1);
        // full reorthogonalization, twice for safety
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        gamma[j] = w.norm();
        m = j + 1;
        if (gamma[j] < 1e-13) break;  // Krylov space exhausted
        v = w / gamma[j];
    }
    if (m < want) return false;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        T(j, j) = alpha[j];
        if (j + 1 < m) {
            T(j, j + 1) = gamma[j];
            T(j + 1, j) = gamma[j];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success) return false;

    // largest thetas of M correspond to the smallest eigenvalues of L_sym
    thetas.resize(want);
    vectors.resize(n, want);
    for (int i = 0; i < want; ++i) {
        const int src = m - 1 - i;
        thetas[i] = es.eigenvalues()[src];
        vectors.col(i) = V.leftCols(m) * es.eigenvectors().col(src);
        vectors.col(i).normalize();
    }
    return true;
}

}  // namespace spectral_detail

// Smallest-n_b eigenbasis of the random-walk Laplacian. Zero modes are the
// exact per-component indicator functions (scaled to unit norm), so the
// reconstruction identity phi*beta = 1 holds to machine precision on any
// graph; beta carries the L1 norm of each zero mode and is zero elsewhere.
// Nonzero modes come from the symmetric normalization mapped back through
// D^{-1/2}, computed densely for small graphs and by shift-invert Lanczos
// otherwise. n_b is raised to the component count when the graph is more
// fragmented than requested.
inline SpectralBasis spectral_basis(const Eigen::SparseMatrix<double>& L_rw, const Graph& graph,
                                    int n_b, int dense_threshold = 2000) {
    const int n = graph.n;
    if (n_b < 1) fail("invalid-argument", "n_b must be at least 1");
    if (n_b > n) fail("invalid-argument", "n_b exceeds the number of graph nodes");

    int n_comp = 0;
    const std::vector<int> comp = connected_components(graph, &n_comp);
    n_b = std::max(n_b, n_comp);
    if (n_b > n) fail("invalid-argument", "graph has more components than nodes allow for n_b");

    SpectralBasis basis;
    basis.n_components = n_comp;
    basis.phi.setZero(n, n_b);
    basis.mu.setZero(n_b);
    basis.beta.setZero(n_b);

    std::vector<int> comp_size(n_comp, 0);
    for (int p = 0; p < n; ++p) ++comp_size[comp[p]];
    for (int p = 0; p < n; ++p) basis.phi(p, comp[p]) = 1.0 / std::sqrt(static_cast<double>(comp_size[comp[p]]));
    for (int c = 0; c < n_comp; ++c) basis.beta[c] = std::sqrt(static_cast<double>(comp_size[c]));

    const int want = n_b - n_comp;
    if (want == 0) return basis;

    const Eigen::SparseMatrix<double> L_sym = spectral_detail::symmetric_laplacian(graph);
    Eigen::VectorXd sqrt_deg(n), inv_sqrt_deg(n);
    for (int p = 0; p < n; ++p) {
        sqrt_deg[p] = std::sqrt(graph.degree[p]);
        inv_sqrt_deg[p] = 1.0 / sqrt_deg[p];
    }
    // null space of L_sym: D^{1/2} * indicator per component, orthonormalized
    Eigen::MatrixXd null_basis(n, n_comp);
    for (int c = 0; c < n_comp; ++c) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        for (int p = 0; p < n; ++p)
            if (comp[p] == c) u[p] = sqrt_deg[p];
        null_basis.col(c) = u / u.norm();
    }

    Eigen::VectorXd mus(want);
    Eigen::MatrixXd us(n, want);
    if (n <= dense_threshold) {
        const Eigen::MatrixXd dense_l_sym(L_sym);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_l_sym);
        if (es.info() != Eigen::Success)
            fail("eigensolver-no-convergence", "dense symmetric eigensolve failed");
        for (int i = 0; i < want; ++i) {
            mus[i] = es.eigenvalues()[n_comp + i];
            us.col(i) = es.eigenvectors().col(n_comp + i);
        }
    } else {
        const double shift = 0.01;
        Rng rng(0x5eedb0073ull ^ static_cast<std::uint64_t>(n));
        bool ok = false;
        Eigen::VectorXd thetas;
        Eigen::MatrixXd vectors;
        double worst_residual = 0.0;
        for (int steps = std::min(n - n_comp, std::max(2 * want + 40, 80)); !ok;
             steps = std::min(n - n_comp, steps * 2)) {
            if (!spectral_detail::shift_invert_lanczos(L_sym, shift, null_basis, want, steps, rng,
                                                       thetas, vectors))
                fail("eigensolver-no-convergence", "Lanczos iteration broke down");
            worst_residual = 0.0;
            for (int i = 0; i < want; ++i) {
                const double mu = 1.0 / thetas[i] - shift;
                const double res = (L_sym * vectors.col(i) - mu * vectors.col(i)).norm();
                worst_residual = std::max(worst_residual, res);
            }
            ok = worst_residual <= 1e-8;
            if (!ok && steps >= std::min(n - n_comp, 600))
                fail("eigensolver-no-convergence",
                     "residual " + std::to_string(worst_residual) + " above 1e-8 after " +
                         std::to_string(steps) + " Lanczos steps");
        }
        for (int i = 0; i < want; ++i) {
            mus[i] = 1.0 / thetas[i] - shift;
            us.col(i) = vectors.col(i);
        }
        // thetas descend, so mus ascend already; enforce exact ordering anyway
        std::vector<int> order(want);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mus[a] < mus[b]; });
        Eigen::VectorXd mus_s(want);
        Eigen::MatrixXd us_s(n, want);
        for (int i = 0; i < want; ++i) {
            mus_s[i] = mus[order[i]];
            us_s.col(i) = us.col(order[i]);
        }
        mus = mus_s;
        us = us_s;
    }

    for (int i = 0; i < want; ++i) {
        Eigen::VectorXd phi = inv_sqrt_deg.asDiagonal() * us.col(i);
        phi.normalize();
        spectral_detail::fix_sign(phi);
        basis.phi.col(n_comp + i) = phi;
        basis.mu[n_comp + i] = std::max(mus[i], 0.0);
    }

    // contract check: the basis must satisfy the eigen-residual on L_rw
    double worst = 0.0;
    for (int i = 0; i < n_b; ++i) {
        const double res =
            (L_rw * basis.phi.col(i) - basis.mu[i] * basis.phi.col(i)).norm() / basis.phi.col(i).norm();
        worst = std::max(worst, res);
    }
    if (worst > 1e-8)
        fail("eigensolver-no-convergence",
             "random-walk residual " + std::to_string(worst) + " above 1e-8");
    return basis;
}

}  // namespace asist
