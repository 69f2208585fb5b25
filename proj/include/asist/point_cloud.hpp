#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "asist/common.hpp"

namespace asist {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Scene or exemplar points, coordinates in meters. `labels` is either empty
// or has one class id per point (0 = clutter).
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<int> labels;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_labels() const { return !labels.empty(); }

    void check_consistent() const {
        if (has_labels() && labels.size() != points.size())
            fail("invalid-cloud", "label count does not match point count");
        for (const Vec3& p : points)
            if (!p.allFinite()) fail("invalid-cloud", "non-finite coordinate");
    }
};

struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void expand(const Vec3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return 0.5 * (min + max); }
    double diagonal() const { return extent().norm(); }
    bool valid() const { return (min.array() <= max.array()).all(); }
};

inline Aabb bounding_box(const std::vector<Vec3>& points) {
    Aabb box;
    for (const Vec3& p : points) box.expand(p);
    return box;
}

inline Aabb bounding_box(const PointCloud& cloud) { return bounding_box(cloud.points); }

}  // namespace asist
