#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "asist/common.hpp"
#include "asist/point_cloud.hpp"

namespace asist {

struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Vec3 translation = Vec3::Zero();

    [[nodiscard]] Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    [[nodiscard]] RigidTransform compose(const RigidTransform& inner) const {
        // (*this) ∘ inner: apply inner first
        return {rotation * inner.rotation, rotation * inner.translation + translation};
    }

    [[nodiscard]] RigidTransform inverse() const {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }

    [[nodiscard]] Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.topLeftCorner<3, 3>() = rotation;
        m.topRightCorner<3, 1>() = translation;
        return m;
    }

    [[nodiscard]] double yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

    void check_orthonormal(double tol = 1e-9) const {
        const double err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
        if (err > tol || rotation.determinant() < 0.0)
            fail("invalid-transform", "rotation is not special orthogonal (error " + std::to_string(err) + ")");
    }
};

inline RigidTransform rigid_from_matrix(const Eigen::Matrix4d& m) {
    RigidTransform t{m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
    t.check_orthonormal(1e-6);
    return t;
}

inline RigidTransform rot_z(double yaw) {
    RigidTransform t;
    const double c = std::cos(yaw), s = std::sin(yaw);
    t.rotation << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return t;
}

// Absolute yaw gap folded into [0, 180] degrees, invariant to full turns.
inline double yaw_difference_deg(double a_rad, double b_rad) {
    double d = std::fmod(rad_to_deg(a_rad - b_rad), 360.0);
    if (d < 0.0) d += 360.0;
    return std::min(d, 360.0 - d);
}

// Weighted least-squares rigid fit (Kabsch): minimizes
// sum_i w_i * || R*src_i + t - dst_i ||^2. Weights must be nonnegative with
// positive total.
inline RigidTransform fit_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                                const std::vector<double>& weights) {
    if (src.size() != dst.size() || src.size() != weights.size())
        fail("invalid-argument", "rigid fit inputs must have equal lengths");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) fail("zero-total-weight", "rigid fit needs positive total weight");

    Vec3 src_mean = Vec3::Zero(), dst_mean = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        src_mean += weights[i] * src[i];
        dst_mean += weights[i] * dst[i];
    }
    src_mean /= total;
    dst_mean /= total;

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i)
        cov += weights[i] * (dst[i] - dst_mean) * (src[i] - src_mean).transpose();

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;

    RigidTransform t;
    t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
    t.translation = dst_mean - t.rotation * src_mean;
    return t;
}

}  // namespace asist
