#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "asist/config.hpp"
#include "asist/energy.hpp"
#include "asist/exemplar.hpp"
#include "asist/forest.hpp"
#include "asist/graph.hpp"
#include "asist/icp.hpp"
#include "asist/mean_shift.hpp"
#include "asist/pose_init.hpp"
#include "asist/segmentation.hpp"
#include "asist/spectral.hpp"
#include "asist/voting.hpp"
#include "asist/voxel_grid.hpp"

namespace asist {

struct Placement {
    int exemplar_id = 0;
    int class_label = 0;
    RigidTransform pose;
    double vote = 0.0;
    double weight_mass = 0.0;
};

struct IterationRecord {
    int outer = 0;
    int inner = 0;
    double lambda6 = 0.0;
    EnergyTerms energy;
    int active_instances = 0;  // rows with positive vote after the last voting step
};

struct AsistTrace {
    std::vector<IterationRecord> iterations;
    IrlsTrace irls;                                // surrogate pairs across all rounds
    std::vector<std::vector<double>> icp_objectives;  // one log per registration run
    std::vector<std::vector<double>> voting_energies;  // one log per voting step
    std::vector<Mode> modes;                       // accepted location proposals (debug)
};

struct AsistResult {
    std::vector<Placement> placements;
    std::vector<Instance> instances;  // all surviving candidate rows, aligned with w rows 1..
    Eigen::MatrixXd w;
    Eigen::VectorXd v;
};

// Initial weights from forest scores: the clutter row copies the clutter
// score, each instance row gets its class score split evenly across the
// instances of that class, so every column still sums to one.
inline Eigen::MatrixXd init_weights(const Eigen::MatrixXd& f, const std::vector<int>& row_class) {
    const auto n_rows = static_cast<Eigen::Index>(row_class.size());
    std::vector<int> class_count(static_cast<std::size_t>(f.rows()), 0);
    for (std::size_t e = 1; e < row_class.size(); ++e)
        ++class_count[static_cast<std::size_t>(row_class[e])];

    Eigen::MatrixXd w(n_rows, f.cols());
    w.row(0) = f.row(0);
    for (Eigen::Index e = 1; e < n_rows; ++e) {
        const int c = row_class[static_cast<std::size_t>(e)];
        w.row(e) = f.row(c) / static_cast<double>(class_count[static_cast<std::size_t>(c)]);
    }
    // classes that proposed no instance leave their score mass unassigned;
    // fold it into clutter so the per-point sum stays exactly one
    for (Eigen::Index c = 1; c < f.rows(); ++c)
        if (class_count[static_cast<std::size_t>(c)] == 0) w.row(0) += f.row(c);
    return w;
}

// One registration pass: every instance pose is refined by weighted
// registration against the scene, using squared weights when the geometric
// term is the squared-weight variant.
inline void registration_step(std::vector<Instance>& instances, const Eigen::MatrixXd& w,
                              const ExemplarSet& set, const std::vector<KdTree>& model_trees,
                              const PointCloud& cloud, bool squared_weights,
                              std::vector<std::vector<double>>* objective_logs = nullptr) {
    std::vector<double> wts(cloud.size());
    for (std::size_t e = 0; e < instances.size(); ++e) {
        const Eigen::Index row = static_cast<Eigen::Index>(e) + 1;
        for (std::size_t p = 0; p < cloud.size(); ++p) {
            const double v = w(row, static_cast<Eigen::Index>(p));
            wts[p] = squared_weights ? v * v : std::max(v, 0.0);
        }
        const auto idx = static_cast<std::size_t>(instances[e].exemplar_id - 1);
        const IcpResult res = register_to_model(cloud.points, wts, set.models[idx].cloud,
                                                model_trees[idx], instances[e].pose);
        instances[e].pose = res.transform;
        if (objective_logs && !res.objectives.empty()) objective_logs->push_back(res.objectives);
    }
}

namespace pipeline_detail {

inline double class_bandwidth(const ExemplarSet& set, int cls, double factor) {
    std::vector<double> diags;
    for (const ExemplarModel& m : set.models)
        if (m.class_label == cls) diags.push_back(m.box.extent().head<2>().norm());
    if (diags.empty()) return 0.0;
    std::sort(diags.begin(), diags.end());
    return factor * diags[diags.size() / 2];
}

}  // namespace pipeline_detail

// Full scene transformation: propose candidate placements from forest scores
// and mode seeking, then alternate registration, reweighted segmentation and
// voting under a growing overlap penalty, and keep the candidates that end
// with a positive vote and enough weight mass.
inline AsistResult run_asist(const PointCloud& cloud, const ExemplarSet& set, const Forest& forest,
                             const PipelineConfig& cfg, AsistTrace* trace = nullptr) {
    AsistResult result;
    if (cloud.size() == 0) return result;
    cloud.check_consistent();
    if (forest.n_classes != set.n_classes + 1)
        fail("class-mismatch", "forest and model database disagree on the class list");

    const VoxelGrid grid = voxelize_with_distance(cloud, cfg.voxel_size);
    const Eigen::MatrixXd f = classify_points(forest, grid, cloud).f;
    const KdTree scene_tree(cloud.points);

    // location proposals and pose seeds
    std::vector<Instance> instances;
    std::vector<Vec2> seed_xy;      // proposal location per instance
    std::vector<double> seed_bw;    // class bandwidth per instance
    for (int cls = 1; cls <= set.n_classes; ++cls) {
        const double bandwidth =
            pipeline_detail::class_bandwidth(set, cls, cfg.bandwidth_factor);
        if (bandwidth <= 0.0) continue;
        std::vector<double> weights(cloud.size());
        for (std::size_t p = 0; p < cloud.size(); ++p)
            weights[p] = std::max(f(cls, static_cast<Eigen::Index>(p)), 0.0);
        const std::vector<Mode> modes = weighted_mean_shift(cloud, weights, bandwidth);
        for (const Mode& mode : modes) {
            if (trace) trace->modes.push_back(mode);
            for (std::size_t mi = 0; mi < set.models.size(); ++mi) {
                const ExemplarModel& model = set.models[mi];
                if (model.class_label != cls) continue;
                const std::optional<RigidTransform> pose = init_pose(
                    model, mode.position, cloud, scene_tree, cfg.voxel_size, bandwidth);
                if (pose) {
                    instances.push_back({static_cast<int>(mi) + 1, cls, *pose});
                    seed_xy.push_back(mode.position);
                    seed_bw.push_back(bandwidth);
                }
            }
        }
    }
    if (instances.empty()) return result;

    const Graph graph = build_knn_graph(cloud, cfg.knn, cfg.sigma_factor * cfg.voxel_size);
    const Eigen::SparseMatrix<double> lap = laplacian(graph);
    const SpectralBasis basis = spectral_basis(lap, graph, cfg.n_basis);
    const Eigen::SparseMatrix<double> lap_sym = symmetrized(lap);

    std::vector<int> row_class(instances.size() + 1, 0);
    for (std::size_t e = 0; e < instances.size(); ++e) row_class[e + 1] = instances[e].class_label;

    std::vector<KdTree> model_trees;
    model_trees.reserve(set.models.size());
    for (const ExemplarModel& m : set.models) model_trees.emplace_back(m.cloud);

    // initial weights, then localize each class's share toward the instances'
    // proposal locations: an even, position-blind split would make the first
    // registration pass of every instance chase all of its class's points,
    // dragging duplicated-object candidates toward each other.  The kernel
    // reweighting keeps every column sum unchanged.
    Eigen::MatrixXd w = init_weights(f, row_class);
    for (std::size_t p = 0; p < cloud.size(); ++p) {
        const Eigen::Index col = static_cast<Eigen::Index>(p);
        const Vec2 xy = cloud.points[p].head<2>();
        for (int cls = 1; cls <= set.n_classes; ++cls) {
            double kernel_sum = 0.0;
            for (std::size_t e = 0; e < instances.size(); ++e)
                if (instances[e].class_label == cls) {
                    const double z = (xy - seed_xy[e]).norm() / seed_bw[e];
                    kernel_sum += std::exp(-0.5 * z * z);
                }
            if (kernel_sum <= 1e-300) continue;  // no proposals nearby: keep the even split
            for (std::size_t e = 0; e < instances.size(); ++e)
                if (instances[e].class_label == cls) {
                    const double z = (xy - seed_xy[e]).norm() / seed_bw[e];
                    w(static_cast<Eigen::Index>(e) + 1, col) =
                        f(cls, col) * std::exp(-0.5 * z * z) / kernel_sum;
                }
        }
    }

    // restrict to the spectral subspace (the all-ones vector lies in the
    // span, so per-point sums survive the projection)
    {
        const Eigen::MatrixXd gram = basis.phi.transpose() * basis.phi;
        const Eigen::MatrixXd alpha0 =
            gram.ldlt().solve(basis.phi.transpose() * w.transpose());
        w = (basis.phi * alpha0).transpose();
    }
    Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(instances.size()));

    const int n_rows = static_cast<int>(instances.size()) + 1;
    EnergyCoefficients coeffs = cfg.coeffs;
    for (int outer = 0; outer < cfg.n_out; ++outer) {
        const std::size_t sched_idx =
            std::min(static_cast<std::size_t>(outer), coeffs.lambda6_schedule.size() - 1);
        coeffs.lambda6 = coeffs.lambda6_schedule[sched_idx];
        if (outer == cfg.n_out - 1) coeffs.lambda6 = std::max(coeffs.lambda6, 1e9);

        for (int inner = 0; inner < cfg.n_in; ++inner) {
            registration_step(instances, w, set, model_trees, cloud, true,
                              trace ? &trace->icp_objectives : nullptr);
            const Eigen::MatrixXd d =
                exemplar_distances(instances, set, model_trees, cloud, coeffs.d_clutter);

            SegmentationProblem prob;
            prob.f = f;
            prob.row_class = row_class;
            prob.d = d;
            prob.v = v;
            prob.laplacian_sym = lap_sym;
            prob.coeffs = coeffs;
            const SpectralSolve solve =
                segmentation_step(prob, basis, w, cfg.n_irls, trace ? &trace->irls : nullptr);
            w = solve.w;

            if (trace) {
                const Eigen::MatrixXd q = collision_matrix(instances, set, cfg.voxel_size);
                IterationRecord rec;
                rec.outer = outer;
                rec.inner = inner;
                rec.lambda6 = coeffs.lambda6;
                rec.energy = total_energy(w, v, f, row_class, lap, d, q, coeffs, true);
                rec.active_instances =
                    static_cast<int>((v.array() > 0.0).count());
                trace->iterations.push_back(rec);
            }
        }

        const Eigen::MatrixXd q = collision_matrix(instances, set, cfg.voxel_size);
        Eigen::VectorXd mass(n_rows - 1);
        for (int e = 1; e < n_rows; ++e) mass(e - 1) = w.row(e).sum();
        const VotingResult vote = voting_step(q, mass, coeffs.lambda5, coeffs.lambda6, v);
        v = vote.v;
        if (trace) trace->voting_energies.push_back(vote.energies);
    }

    Eigen::VectorXd mass(n_rows - 1);
    for (int e = 1; e < n_rows; ++e) mass(e - 1) = w.row(e).sum();
    for (std::size_t e = 0; e < instances.size(); ++e) {
        const double ve = v(static_cast<Eigen::Index>(e));
        const double me = mass(static_cast<Eigen::Index>(e));
        if (ve > 0.0 && me >= cfg.output_threshold)
            result.placements.push_back(
                {instances[e].exemplar_id, instances[e].class_label, instances[e].pose, ve, me});
    }
    result.instances = std::move(instances);
    result.w = std::move(w);
    result.v = std::move(v);
    return result;
}

}  // namespace asist
