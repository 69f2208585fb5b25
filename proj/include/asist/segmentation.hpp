#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "asist/common.hpp"
#include "asist/energy.hpp"
#include "asist/spectral.hpp"

namespace asist {

// Reweighting coefficients that turn the ell-exponent sparsity penalty into a
// quadratic surrogate: eta = (|w| + eps)^(ell-2), evaluated entrywise.
inline Eigen::MatrixXd irls_weights(const Eigen::MatrixXd& w_prev, double ell,
                                    double eps_irls = 1e-4) {
    if (!(ell > 0.0 && ell < 1.0)) fail("invalid-argument", "sparsity exponent must lie in (0,1)");
    if (!(eps_irls > 0.0)) fail("invalid-argument", "IRLS guard must be positive");
    return (w_prev.array().abs() + eps_irls).pow(ell - 2.0).matrix();
}

// Everything the weight subproblem needs besides the unknowns themselves.
// Rows are ordered clutter first, then one row per posed instance.
struct SegmentationProblem {
    Eigen::MatrixXd f;                        // (n_classes+1) x n_p scores, row 0 = clutter
    std::vector<int> row_class;               // class per weight row, row_class[0] == 0
    Eigen::MatrixXd d;                        // per-row point distances (row 0 constant)
    Eigen::VectorXd v;                        // votes per instance (size rows-1)
    Eigen::SparseMatrix<double> laplacian_sym;  // symmetrized graph Laplacian
    EnergyCoefficients coeffs;

    Eigen::Index rows() const { return static_cast<Eigen::Index>(row_class.size()); }
    Eigen::Index points() const { return f.cols(); }
};

inline Eigen::SparseMatrix<double> symmetrized(const Eigen::SparseMatrix<double>& m) {
    Eigen::SparseMatrix<double> mt = m.transpose();
    return 0.5 * (m + mt);
}

// Quadratic surrogate value at w for frozen IRLS coefficients.
inline double surrogate_energy(const SegmentationProblem& prob, const Eigen::MatrixXd& eta,
                               const Eigen::MatrixXd& w, bool squared_geometric) {
    const Eigen::MatrixXd a =
        augmented_class_matrix(prob.row_class, static_cast<int>(prob.f.rows()) - 1);
    double val = prob.coeffs.lambda1 * (prob.f - a * w).squaredNorm();
    val += prob.coeffs.lambda2 * (squared_geometric ? (prob.d.array() * w.array().square()).sum()
                                                    : (prob.d.array() * w.array()).sum());
    for (Eigen::Index e = 0; e < w.rows(); ++e)
        val += prob.coeffs.lambda3 * w.row(e).dot((prob.laplacian_sym * w.row(e).transpose()).transpose());
    val += prob.coeffs.lambda4 * (eta.array() * w.array().square()).sum();
    for (Eigen::Index e = 1; e < w.rows(); ++e)
        val -= prob.coeffs.lambda5 * prob.v(e - 1) * w.row(e).sum();
    return val;
}

struct SpectralSolve {
    Eigen::MatrixXd w;      // rows x n_p
    Eigen::MatrixXd alpha;  // n_b x rows (one coefficient column per row)
};

// Minimizes the frozen-eta surrogate over the spectral subspace w_e = Phi a_e
// subject to sum_e a_e = beta (which encodes the per-point simplex sum).  The
// optimality conditions form one symmetric indefinite linear system.
inline SpectralSolve solve_surrogate_spectral(const SegmentationProblem& prob,
                                              const SpectralBasis& basis,
                                              const Eigen::MatrixXd& eta) {
    const Eigen::Index n_rows = prob.rows();
    const Eigen::Index n_p = prob.points();
    const Eigen::Index n_b = basis.phi.cols();
    if (basis.phi.rows() != n_p) fail("invalid-argument", "basis/problem size mismatch");
    if (eta.rows() != n_rows || eta.cols() != n_p)
        fail("invalid-argument", "eta/problem size mismatch");

    const Eigen::MatrixXd& phi = basis.phi;
    const Eigen::MatrixXd gram = phi.transpose() * phi;
    const Eigen::MatrixXd smooth = phi.transpose() * (prob.laplacian_sym * phi);

    const Eigen::Index dim = n_rows * n_b;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index e = 0; e < n_rows; ++e) {
        const Eigen::VectorXd diag_coeffs =
            (prob.coeffs.lambda2 * prob.d.row(e).transpose().array() +
             prob.coeffs.lambda4 * eta.row(e).transpose().array())
                .matrix();
        const Eigen::MatrixXd local =
            prob.coeffs.lambda3 * smooth + phi.transpose() * diag_coeffs.asDiagonal() * phi;
        h.block(e * n_b, e * n_b, n_b, n_b) += local;
        for (Eigen::Index e2 = 0; e2 < n_rows; ++e2)
            if (prob.row_class[static_cast<std::size_t>(e)] ==
                prob.row_class[static_cast<std::size_t>(e2)])
                h.block(e * n_b, e2 * n_b, n_b, n_b) += prob.coeffs.lambda1 * gram;

        Eigen::VectorXd ge =
            -2.0 * prob.coeffs.lambda1 * phi.transpose() *
            prob.f.row(prob.row_class[static_cast<std::size_t>(e)]).transpose();
        if (e >= 1)
            ge -= prob.coeffs.lambda5 * prob.v(e - 1) * (phi.transpose() * Eigen::VectorXd::Ones(n_p));
        g.segment(e * n_b, n_b) = ge;
    }

    const auto assemble_and_solve = [&](double reg, Eigen::VectorXd& out) {
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim + n_b, dim + n_b);
        kkt.topLeftCorner(dim, dim) = 2.0 * h;
        if (reg > 0.0) kkt.topLeftCorner(dim, dim).diagonal().array() += reg;
        for (Eigen::Index e = 0; e < n_rows; ++e) {
            kkt.block(dim, e * n_b, n_b, n_b).setIdentity();
            kkt.block(e * n_b, dim, n_b, n_b).setIdentity();
        }
        Eigen::VectorXd rhs(dim + n_b);
        rhs.head(dim) = -g;
        rhs.tail(n_b) = basis.beta;
        out = kkt.partialPivLu().solve(rhs);
        const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
        return (kkt * out - rhs).lpNorm<Eigen::Infinity>() / scale;
    };

    Eigen::VectorXd sol;
    double residual = assemble_and_solve(0.0, sol);
    if (!(residual <= 1e-6)) {
        residual = assemble_and_solve(1e-10, sol);
        if (!(residual <= 1e-6))
            fail("singular-kkt-system",
                 "optimality system unsolvable, residual " + std::to_string(residual));
    }

    SpectralSolve out;
    out.alpha.resize(n_b, n_rows);
    for (Eigen::Index e = 0; e < n_rows; ++e) out.alpha.col(e) = sol.segment(e * n_b, n_b);
    out.w = (phi * out.alpha).transpose();
    return out;
}

struct IrlsTrace {
    std::vector<double> before;  // frozen-eta surrogate at the round's input
    std::vector<double> after;   // frozen-eta surrogate at the round's solution
};

// Full segmentation update: alternates reweighting and the spectral surrogate
// solve for a fixed number of rounds.  The geometric term uses squared
// weights throughout (the form under which the solve stays a linear system).
inline SpectralSolve segmentation_step(const SegmentationProblem& prob, const SpectralBasis& basis,
                                       const Eigen::MatrixXd& w_start, int n_irls,
                                       IrlsTrace* trace = nullptr) {
    if (n_irls < 1) fail("invalid-argument", "at least one reweighting round required");
    SpectralSolve cur;
    cur.w = w_start;
    for (int k = 0; k < n_irls; ++k) {
        const Eigen::MatrixXd eta = irls_weights(cur.w, prob.coeffs.ell);
        if (trace) trace->before.push_back(surrogate_energy(prob, eta, cur.w, true));
        cur = solve_surrogate_spectral(prob, basis, eta);
        if (trace) trace->after.push_back(surrogate_energy(prob, eta, cur.w, true));
    }
    return cur;
}

namespace segmentation_detail {

// Euclidean projection of a small vector onto the probability simplex.
inline void project_simplex(Eigen::VectorXd& z) {
    const Eigen::Index n = z.size();
    std::vector<double> u(z.data(), z.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    int rho = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cum += u[static_cast<std::size_t>(j)];
        const double cand = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - cand > 0.0) {
            rho = static_cast<int>(j + 1);
            tau = cand;
        }
    }
    (void)rho;
    z = (z.array() - tau).cwiseMax(0.0).matrix();
}

}  // namespace segmentation_detail

struct ReferenceSolve {
    Eigen::MatrixXd w;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

// Test-scale solver for the frozen-eta surrogate under the full constraints
// (per-point simplex: column sums 1, all weights nonnegative), by accelerated
// projected gradient with adaptive restart.  Serves as the oracle for the
// spectral path; refuses problems beyond small scale.
inline ReferenceSolve solve_surrogate_reference(const SegmentationProblem& prob,
                                                const Eigen::MatrixXd& eta, bool squared_geometric,
                                                const Eigen::MatrixXd* w0 = nullptr,
                                                double tol = 1e-8, int max_iters = 200000) {
    const Eigen::Index n_rows = prob.rows();
    const Eigen::Index n_p = prob.points();
    if (static_cast<double>(n_rows - 1) * static_cast<double>(n_p) > 1e4)
        fail("size-exceeded", "reference solver is restricted to test-scale problems");

    const Eigen::MatrixXd a =
        augmented_class_matrix(prob.row_class, static_cast<int>(prob.f.rows()) - 1);
    const double l1 = prob.coeffs.lambda1, l2 = prob.coeffs.lambda2, l3 = prob.coeffs.lambda3,
                 l4 = prob.coeffs.lambda4, l5 = prob.coeffs.lambda5;

    const auto quad_op = [&](const Eigen::MatrixXd& x) {
        Eigen::MatrixXd y = 2.0 * l1 * (a.transpose() * (a * x));
        y += 2.0 * l3 * (x * prob.laplacian_sym);
        y += (2.0 * l4 * eta.array() * x.array()).matrix();
        if (squared_geometric) y += (2.0 * l2 * prob.d.array() * x.array()).matrix();
        return y;
    };
    Eigen::MatrixXd lin_part = -2.0 * l1 * (a.transpose() * prob.f);
    if (!squared_geometric) lin_part += l2 * prob.d;
    for (Eigen::Index e = 1; e < n_rows; ++e)
        lin_part.row(e).array() -= l5 * prob.v(e - 1);

    // Power iteration bounds the curvature; the step is its safe inverse.
    Rng rng(0x5eedULL);
    Eigen::MatrixXd z(n_rows, n_p);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    double lip = 1.0;
    for (int it = 0; it < 80; ++it) {
        z /= std::max(z.norm(), 1e-300);
        z = quad_op(z);
        lip = z.norm();
    }
    const double step = 1.0 / (1.05 * lip + 1e-12);

    const auto objective = [&](const Eigen::MatrixXd& x) {
        return surrogate_energy(prob, eta, x, squared_geometric);
    };
    const auto project = [&](Eigen::MatrixXd& x) {
        Eigen::VectorXd col(n_rows);
        for (Eigen::Index p = 0; p < n_p; ++p) {
            col = x.col(p);
            segmentation_detail::project_simplex(col);
            x.col(p) = col;
        }
    };

    ReferenceSolve out;
    Eigen::MatrixXd w = w0 ? *w0 : Eigen::MatrixXd::Constant(n_rows, n_p, 1.0 / static_cast<double>(n_rows));
    project(w);
    Eigen::MatrixXd y = w, w_prev = w;
    double t = 1.0;
    double best_obj = objective(w);
    for (int it = 0; it < max_iters; ++it) {
        Eigen::MatrixXd grad_y = quad_op(y) + lin_part;
        Eigen::MatrixXd w_next = y - step * grad_y;
        project(w_next);

        const double obj_next = objective(w_next);
        if (obj_next > best_obj) {  // lost momentum: restart from the best point
            t = 1.0;
            y = w;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = w_next + ((t - 1.0) / t_next) * (w_next - w_prev);
        w_prev = w;
        w = w_next;
        t = t_next;
        best_obj = obj_next;
        out.iterations = it + 1;

        Eigen::MatrixXd fixed = w - step * (quad_op(w) + lin_part);
        project(fixed);
        out.residual = (w - fixed).lpNorm<Eigen::Infinity>();
        if (out.residual <= tol) {
            out.converged = true;
            break;
        }
    }
    out.w = w;
    return out;
}

}  // namespace asist
