#pragma once

#include <cmath>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "asist/common.hpp"
#include "asist/exemplar.hpp"
#include "asist/kdtree.hpp"
#include "asist/point_cloud.hpp"
#include "asist/rigid.hpp"

namespace asist {

// One posed candidate in the optimization: a model from the library placed in
// the scene.  The same model may appear several times at different locations.
struct Instance {
    int exemplar_id = 0;  // 1-based id into the ExemplarSet
    int class_label = 0;
    RigidTransform pose;
};

struct EnergyCoefficients {
    double lambda1 = 1.0;   // semantic data term
    double lambda2 = 1.0;   // geometric fit term
    double lambda3 = 100.0; // smoothness term
    double lambda4 = 10.0;  // sparsity term
    double lambda5 = 1.0;   // vote-weight coupling term
    double lambda6 = 0.0;   // overlap penalty (current value of the schedule)
    double ell = 0.1;       // sparsity exponent in (0,1)
    double d_clutter = 10.0;
    std::vector<double> lambda6_schedule = {1.0, 5.0, 10.0, 100.0, 1e9};
};

struct EnergyTerms {
    double semantic = 0.0;    // sum over points/classes of squared score residual
    double geometric = 0.0;   // weighted point-to-model distances
    double smoothness = 0.0;  // graph Laplacian quadratic form per row
    double sparsity = 0.0;    // ell-norm of the weights (or its IRLS surrogate)
    double vote_link = 0.0;   // minus the vote-weighted row masses
    double overlap = 0.0;     // vote collision quadratic form
    double total = 0.0;
};

// Maps optimization rows (row 0 = clutter, rows 1.. = instances) to class
// slots 0..n_classes: entry (c, e) = 1 iff row e belongs to class c.
inline Eigen::MatrixXd augmented_class_matrix(const std::vector<int>& row_class, int n_classes) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_classes + 1, static_cast<Eigen::Index>(row_class.size()));
    for (std::size_t e = 0; e < row_class.size(); ++e) {
        const int c = row_class[e];
        if (c < 0 || c > n_classes) fail("invalid-argument", "row class out of range");
        if (e == 0 && c != 0) fail("invalid-argument", "row 0 must be the clutter row");
        a(c, static_cast<Eigen::Index>(e)) = 1.0;
    }
    return a;
}

// Distance matrix d: row 0 is the constant clutter distance, row e >= 1 holds
// the squared distance from each scene point to the nearest point of the
// posed instance, capped at 4 x d_clutter.
inline Eigen::MatrixXd exemplar_distances(const std::vector<Instance>& instances,
                                          const ExemplarSet& set,
                                          const std::vector<KdTree>& model_trees,
                                          const PointCloud& cloud, double d_clutter) {
    const auto n_p = static_cast<Eigen::Index>(cloud.size());
    const auto n_rows = static_cast<Eigen::Index>(instances.size()) + 1;
    const double cap = 4.0 * d_clutter;
    Eigen::MatrixXd d(n_rows, n_p);
    d.row(0).setConstant(d_clutter);
    for (std::size_t e = 0; e < instances.size(); ++e) {
        const Instance& inst = instances[e];
        const auto model_idx = static_cast<std::size_t>(inst.exemplar_id - 1);
        if (model_idx >= set.models.size()) fail("invalid-argument", "instance references unknown model");
        const KdTree& tree = model_trees[model_idx];
        const RigidTransform inv = inst.pose.inverse();
        for (Eigen::Index p = 0; p < n_p; ++p) {
            const Neighbor nb = tree.nearest(inv.apply(cloud.points[static_cast<std::size_t>(p)]));
            d(static_cast<Eigen::Index>(e) + 1, p) = std::min(nb.sq_dist, cap);
        }
    }
    return d;
}

inline Eigen::MatrixXd exemplar_distances(const std::vector<Instance>& instances,
                                          const ExemplarSet& set, const PointCloud& cloud,
                                          double d_clutter) {
    std::vector<KdTree> trees;
    trees.reserve(set.models.size());
    for (const ExemplarModel& m : set.models) trees.emplace_back(m.cloud);
    return exemplar_distances(instances, set, trees, cloud, d_clutter);
}

namespace energy_detail {

inline std::int64_t pack_voxel_key(long ix, long iy, long iz) {
    const auto enc = [](long v) {
        return static_cast<std::uint64_t>(v + (1L << 20)) & ((1ULL << 21) - 1);
    };
    return static_cast<std::int64_t>(enc(ix) | (enc(iy) << 21) | (enc(iz) << 42));
}

inline std::unordered_set<std::int64_t> posed_voxel_set(const ExemplarModel& model,
                                                        const RigidTransform& pose,
                                                        double voxel_size) {
    std::unordered_set<std::int64_t> keys;
    keys.reserve(model.cloud.size());
    for (const Vec3& x : model.cloud) {
        const Vec3 y = pose.apply(x) / voxel_size;
        keys.insert(pack_voxel_key(static_cast<long>(std::floor(y.x())),
                                   static_cast<long>(std::floor(y.y())),
                                   static_cast<long>(std::floor(y.z()))));
    }
    return keys;
}

}  // namespace energy_detail

// Symmetric 0/1 matrix over instances: 1 iff the two posed models occupy at
// least one common voxel of the global lattice with the given cell size.
inline Eigen::MatrixXd collision_matrix(const std::vector<Instance>& instances,
                                        const ExemplarSet& set, double voxel_size) {
    if (!(voxel_size > 0.0)) fail("invalid-argument", "voxel size must be positive");
    const auto n = static_cast<Eigen::Index>(instances.size());
    std::vector<std::unordered_set<std::int64_t>> voxels;
    voxels.reserve(instances.size());
    for (const Instance& inst : instances) {
        const auto idx = static_cast<std::size_t>(inst.exemplar_id - 1);
        if (idx >= set.models.size()) fail("invalid-argument", "instance references unknown model");
        voxels.push_back(energy_detail::posed_voxel_set(set.models[idx], inst.pose, voxel_size));
    }
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const auto& small = voxels[static_cast<std::size_t>(
                voxels[static_cast<std::size_t>(a)].size() <= voxels[static_cast<std::size_t>(b)].size() ? a : b)];
            const auto& large = voxels[static_cast<std::size_t>(
                voxels[static_cast<std::size_t>(a)].size() <= voxels[static_cast<std::size_t>(b)].size() ? b : a)];
            bool hit = false;
            for (std::int64_t key : small)
                if (large.count(key)) {
                    hit = true;
                    break;
                }
            if (hit) q(a, b) = q(b, a) = 1.0;
        }
    return q;
}

// Evaluates all six energy terms.  `w` has one row per optimization row
// (clutter first), `v` one vote per instance.  `squared_geometric` selects
// between the linear-in-w and squared-in-w geometric accounting.
inline EnergyTerms total_energy(const Eigen::MatrixXd& w, const Eigen::VectorXd& v,
                                const Eigen::MatrixXd& f, const std::vector<int>& row_class,
                                const Eigen::SparseMatrix<double>& laplacian,
                                const Eigen::MatrixXd& d, const Eigen::MatrixXd& q,
                                const EnergyCoefficients& coeffs, bool squared_geometric) {
    const Eigen::Index n_rows = w.rows();
    const Eigen::Index n_p = w.cols();
    if (f.cols() != n_p || d.rows() != n_rows || d.cols() != n_p)
        fail("invalid-argument", "inconsistent energy inputs");
    if (static_cast<Eigen::Index>(row_class.size()) != n_rows)
        fail("invalid-argument", "one class per weight row required");
    if (v.size() != n_rows - 1 || q.rows() != v.size() || q.cols() != v.size())
        fail("invalid-argument", "one vote per instance required");

    EnergyTerms t;
    const Eigen::MatrixXd a = augmented_class_matrix(row_class, static_cast<int>(f.rows()) - 1);
    t.semantic = (f - a * w).squaredNorm();
    t.geometric = squared_geometric ? (d.array() * w.array().square()).sum()
                                    : (d.array() * w.array()).sum();
    for (Eigen::Index e = 0; e < n_rows; ++e)
        t.smoothness += w.row(e).dot((laplacian * w.row(e).transpose()).transpose());
    t.sparsity = w.array().abs().pow(coeffs.ell).sum();
    for (Eigen::Index e = 1; e < n_rows; ++e) t.vote_link -= v(e - 1) * w.row(e).sum();
    t.overlap = v.dot(q * v);
    t.total = coeffs.lambda1 * t.semantic + coeffs.lambda2 * t.geometric +
              coeffs.lambda3 * t.smoothness + coeffs.lambda4 * t.sparsity +
              coeffs.lambda5 * t.vote_link + coeffs.lambda6 * t.overlap;
    return t;
}

}  // namespace asist
