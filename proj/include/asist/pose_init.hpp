#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "asist/common.hpp"
#include "asist/exemplar.hpp"
#include "asist/icp.hpp"
#include "asist/kdtree.hpp"
#include "asist/mean_shift.hpp"
#include "asist/rigid.hpp"

namespace asist {

namespace pose_detail {

// Nearest-rank lower percentile of an unsorted sample.
inline double percentile(std::vector<double> values, double fraction) {
    if (values.empty()) fail("invalid-argument", "percentile of empty sample");
    const auto idx = static_cast<std::ptrdiff_t>(
        std::floor(fraction * static_cast<double>(values.size() - 1)));
    std::nth_element(values.begin(), values.begin() + idx, values.end());
    return values[static_cast<std::size_t>(idx)];
}

inline double mean_scene_distance(const std::vector<Vec3>& model, const KdTree& scene_tree,
                                  const RigidTransform& pose) {
    double acc = 0.0;
    for (const Vec3& x : model) {
        const Neighbor nb = scene_tree.nearest(pose.apply(x));
        acc += std::sqrt(nb.sq_dist);
    }
    return acc / static_cast<double>(model.size());
}

}  // namespace pose_detail

// Seeds a model pose at a footprint mode: the model is dropped onto the local
// floor height (5th percentile of scene z within one bandwidth of the mode,
// falling back to the global percentile), spun through 8 evenly spaced yaws,
// each refined with uniform-weight registration against the scene; the
// candidate with the smallest mean point-to-scene distance wins.  Candidates
// whose best mean distance exceeds 3 voxels are rejected.
inline std::optional<RigidTransform> init_pose(const ExemplarModel& model, const Vec2& mode,
                                               const PointCloud& scene, const KdTree& scene_tree,
                                               double voxel_size, double bandwidth,
                                               double* best_distance_out = nullptr) {
    if (scene.size() == 0) fail("empty-cloud", "cannot seed a pose in an empty scene");
    if (model.cloud.size() == 0) fail("invalid-argument", "model has no sampled points");

    std::vector<double> local_z;
    for (const Vec3& x : scene.points)
        if ((x.head<2>() - mode).norm() <= bandwidth) local_z.push_back(x.z());
    if (local_z.empty())
        for (const Vec3& x : scene.points) local_z.push_back(x.z());
    const double floor_z = pose_detail::percentile(std::move(local_z), 0.05);

    Vec2 centroid = Vec2::Zero();
    for (const Vec3& x : model.cloud) centroid += x.head<2>();
    centroid /= static_cast<double>(model.cloud.size());

    std::optional<RigidTransform> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 8; ++k) {
        RigidTransform t0;
        t0.rotation = rot_z(2.0 * kPi * static_cast<double>(k) / 8.0).rotation;
        const Vec2 spun = (t0.rotation * Vec3(centroid.x(), centroid.y(), 0.0)).head<2>();
        t0.translation = Vec3(mode.x() - spun.x(), mode.y() - spun.y(), floor_z);

        const IcpResult refined =
            register_to_scene(model.cloud, scene.points, scene_tree, t0);
        const double dist =
            pose_detail::mean_scene_distance(model.cloud, scene_tree, refined.transform);
        if (dist < best_dist) {
            best_dist = dist;
            best = refined.transform;
        }
    }

    if (best_distance_out) *best_distance_out = best_dist;
    if (best_dist > 3.0 * voxel_size) return std::nullopt;
    return best;
}

}  // namespace asist
