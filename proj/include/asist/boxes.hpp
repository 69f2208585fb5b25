#pragma once

#include <array>
#include <cmath>

#include "asist/common.hpp"
#include "asist/point_cloud.hpp"
#include "asist/rigid.hpp"

namespace asist {

// Rotated rectangular box. `rotation` is a full 3x3 matrix so that boxes can
// carry arbitrary recovered poses; ground-truth boxes use pure yaw.
struct OrientedBox {
    Vec3 center = Vec3::Zero();
    Vec3 half_extents = Vec3::Zero();
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

    [[nodiscard]] bool contains(const Vec3& p) const {
        const Vec3 local = rotation.transpose() * (p - center);
        return std::abs(local.x()) <= half_extents.x() &&
               std::abs(local.y()) <= half_extents.y() &&
               std::abs(local.z()) <= half_extents.z();
    }

    [[nodiscard]] std::array<Vec3, 8> corners() const {
        std::array<Vec3, 8> out;
        for (int i = 0; i < 8; ++i) {
            const Vec3 sign((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
            out[static_cast<std::size_t>(i)] =
                center + rotation * sign.cwiseProduct(half_extents).eval();
        }
        return out;
    }

    [[nodiscard]] double yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }
};

inline OrientedBox yaw_box(const Vec3& center, const Vec3& half_extents, double yaw) {
    OrientedBox b;
    b.center = center;
    b.half_extents = half_extents;
    b.rotation = rot_z(yaw).rotation;
    return b;
}

// Canonical axis-aligned bounds carried into the scene by a rigid pose.
inline OrientedBox box_under_transform(const Aabb& canonical, const RigidTransform& pose) {
    OrientedBox b;
    b.half_extents = 0.5 * canonical.extent();
    b.center = pose.apply(canonical.center());
    b.rotation = pose.rotation;
    return b;
}

struct IouEstimate {
    double iou = 0.0;
    double std_error = 0.0;
};

// Volume intersection-over-union by uniform sampling of the pair's common
// axis-aligned hull. Exact 0 when no sample hits both boxes, exact 1 when
// the hit sets coincide, so the degenerate cases are noise-free.
inline IouEstimate oriented_iou(const OrientedBox& a, const OrientedBox& b, Rng rng,
                                int n_samples = 200000) {
    if ((a.half_extents.array() <= 0.0).any() || (b.half_extents.array() <= 0.0).any())
        fail("invalid-argument", "box half extents must be positive");

    Aabb hull;
    for (const Vec3& c : a.corners()) hull.expand(c);
    for (const Vec3& c : b.corners()) hull.expand(c);

    long in_a = 0, in_b = 0, in_both = 0;
    for (int i = 0; i < n_samples; ++i) {
        const Vec3 p(rng.uniform(hull.min.x(), hull.max.x()),
                     rng.uniform(hull.min.y(), hull.max.y()),
                     rng.uniform(hull.min.z(), hull.max.z()));
        const bool hit_a = a.contains(p);
        const bool hit_b = b.contains(p);
        in_a += hit_a;
        in_b += hit_b;
        in_both += hit_a && hit_b;
    }

    IouEstimate est;
    const long in_union = in_a + in_b - in_both;
    if (in_both == 0 || in_union == 0) return est;  // disjoint: exactly zero
    est.iou = static_cast<double>(in_both) / static_cast<double>(in_union);
    est.std_error =
        std::sqrt(std::max(est.iou * (1.0 - est.iou), 0.0) / static_cast<double>(in_union));
    return est;
}

// Exact overlap test for the xy-footprints of two yaw-only boxes (separating
// axis theorem on the two rectangles). Used to enforce non-overlap when
// synthesizing scenes.
inline bool footprints_overlap(const OrientedBox& a, const OrientedBox& b) {
    const auto axes_of = [](const OrientedBox& box) {
        return std::array<Vec2, 2>{Vec2(std::cos(box.yaw()), std::sin(box.yaw())),
                                   Vec2(-std::sin(box.yaw()), std::cos(box.yaw()))};
    };
    const std::array<Vec2, 2> axes_a = axes_of(a);
    const std::array<Vec2, 2> axes_b = axes_of(b);
    const Vec2 delta = b.center.head<2>() - a.center.head<2>();

    const auto radius = [](const std::array<Vec2, 2>& axes, const Vec3& half, const Vec2& dir) {
        return half.x() * std::abs(axes[0].dot(dir)) + half.y() * std::abs(axes[1].dot(dir));
    };
    for (const Vec2& axis : {axes_a[0], axes_a[1], axes_b[0], axes_b[1]}) {
        const double sep = std::abs(delta.dot(axis));
        if (sep > radius(axes_a, a.half_extents, axis) + radius(axes_b, b.half_extents, axis))
            return false;
    }
    return true;
}

}  // namespace asist
