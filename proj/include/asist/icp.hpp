#pragma once

#include <cmath>
#include <vector>

#include "asist/common.hpp"
#include "asist/kdtree.hpp"
#include "asist/point_cloud.hpp"
#include "asist/rigid.hpp"

namespace asist {

struct IcpResult {
    RigidTransform transform;
    // Interleaved objective log: value after each correspondence update and
    // after each rigid refit. Non-increasing by construction.
    std::vector<double> objectives;
    int iterations = 0;
};

// Refines the pose of a model against weighted scene points.  Alternates
// (a) matching every weighted scene point to the nearest transformed model
// point and (b) a weighted least-squares rigid refit, until the objective
//   sum_p w_p ||x_p - nearest(T * model)||^2
// changes by less than `rel_tol` relative or `max_iters` rounds have run.
// A weight vector with no positive mass returns the initial pose unchanged.
inline IcpResult register_to_model(const std::vector<Vec3>& scene, const std::vector<double>& weights,
                                   const std::vector<Vec3>& model, const KdTree& model_tree,
                                   const RigidTransform& initial, int max_iters = 50,
                                   double rel_tol = 1e-6) {
    if (scene.size() != weights.size()) fail("invalid-argument", "one weight per scene point required");
    if (model.empty()) fail("invalid-argument", "model cloud is empty");

    IcpResult res;
    res.transform = initial;

    double max_w = 0.0;
    for (double w : weights) max_w = std::max(max_w, w);
    if (max_w <= 0.0) return res;

    // Only points carrying non-negligible weight influence the fit; freezing
    // the active set up front keeps the logged objective on one fixed sum.
    std::vector<int> active;
    for (std::size_t p = 0; p < scene.size(); ++p)
        if (weights[p] > 1e-12 * max_w) active.push_back(static_cast<int>(p));

    std::vector<Vec3> matched(active.size());
    std::vector<Vec3> targets(active.size());
    std::vector<double> w_active(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
        targets[i] = scene[static_cast<std::size_t>(active[i])];
        w_active[i] = weights[static_cast<std::size_t>(active[i])];
    }

    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        // Nearest transformed model point == nearest canonical point of T^-1 x.
        const RigidTransform inv = res.transform.inverse();
        double obj_match = 0.0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            const Neighbor nb = model_tree.nearest(inv.apply(targets[i]));
            matched[i] = model[static_cast<std::size_t>(nb.index)];
            obj_match += w_active[i] * (targets[i] - res.transform.apply(matched[i])).squaredNorm();
        }
        res.objectives.push_back(obj_match);

        res.transform = fit_rigid(matched, targets, w_active);
        double obj_fit = 0.0;
        for (std::size_t i = 0; i < active.size(); ++i)
            obj_fit += w_active[i] * (targets[i] - res.transform.apply(matched[i])).squaredNorm();
        res.objectives.push_back(obj_fit);
        res.iterations = it + 1;

        if (std::isfinite(prev) && std::abs(prev - obj_fit) <= rel_tol * std::max(prev, 1e-300)) break;
        prev = obj_fit;
    }
    return res;
}

// Uniform-weight variant used when seeding poses: correspondences run from
// the transformed model points to their nearest scene points.
inline IcpResult register_to_scene(const std::vector<Vec3>& model, const std::vector<Vec3>& scene,
                                   const KdTree& scene_tree, const RigidTransform& initial,
                                   int max_iters = 50, double rel_tol = 1e-6) {
    if (model.empty() || scene.empty()) fail("invalid-argument", "empty cloud in registration");

    IcpResult res;
    res.transform = initial;
    std::vector<Vec3> matched(model.size());
    const std::vector<double> ones(model.size(), 1.0);

    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        double obj_match = 0.0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            const Vec3 moved = res.transform.apply(model[i]);
            const Neighbor nb = scene_tree.nearest(moved);
            matched[i] = scene[static_cast<std::size_t>(nb.index)];
            obj_match += (matched[i] - moved).squaredNorm();
        }
        res.objectives.push_back(obj_match);

        res.transform = fit_rigid(model, matched, ones);
        double obj_fit = 0.0;
        for (std::size_t i = 0; i < model.size(); ++i)
            obj_fit += (matched[i] - res.transform.apply(model[i])).squaredNorm();
        res.objectives.push_back(obj_fit);
        res.iterations = it + 1;

        if (std::isfinite(prev) && std::abs(prev - obj_fit) <= rel_tol * std::max(prev, 1e-300)) break;
        prev = obj_fit;
    }
    return res;
}

}  // namespace asist
