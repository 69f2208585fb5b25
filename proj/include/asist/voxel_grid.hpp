#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "asist/kdtree.hpp"
#include "asist/point_cloud.hpp"

namespace asist {

struct VoxelGrid {
    Vec3 origin = Vec3::Zero();   // min corner of cell (0,0,0)
    double voxel_size = 0.0;
    Eigen::Vector3i dims = Eigen::Vector3i::Zero();
    std::vector<std::uint8_t> occupancy;
    std::vector<double> distance;

    [[nodiscard]] std::size_t cell_count() const {
        return static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
    }
    [[nodiscard]] bool in_bounds(int i, int j, int k) const {
        return i >= 0 && j >= 0 && k >= 0 && i < dims.x() && j < dims.y() && k < dims.z();
    }
    [[nodiscard]] std::size_t linear_index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims.x()) * (static_cast<std::size_t>(j) +
                                                     static_cast<std::size_t>(dims.y()) * k);
    }
    [[nodiscard]] Vec3 center(int i, int j, int k) const {
        return origin + voxel_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
    }
    // Quantized cell of a point; cloud points land in the grid interior
    // because the origin leaves a one-cell margin plus half a voxel of slack.
    [[nodiscard]] Eigen::Vector3i cell_of(const Vec3& p) const {
        Eigen::Vector3i c;
        for (int a = 0; a < 3; ++a)
            c[a] = static_cast<int>(std::floor((p[a] - origin[a]) / voxel_size));
        return c;
    }
    [[nodiscard]] bool occupied(int i, int j, int k) const {
        return in_bounds(i, j, k) && occupancy[linear_index(i, j, k)] != 0;
    }
    // Distance reads outside the grid saturate at the cap used by the
    // distance transform, matching how empty space far from the cloud looks.
    [[nodiscard]] double distance_at(int i, int j, int k) const {
        if (!in_bounds(i, j, k)) return 10.0 * voxel_size;
        return distance[linear_index(i, j, k)];
    }
};

// Quantizes the cloud onto a regular grid whose box covers every point with a
// one-cell empty margin on each side. The origin is offset by 1.5 voxels from
// the cloud minimum so the minimal point sits at a voxel center (an isolated
// point is therefore centered in its voxel). A cloud whose points all
// coincide still yields a valid grid of at least 3x3x3 cells.
inline VoxelGrid voxelize(const PointCloud& cloud, double voxel_size) {
    cloud.check_consistent();
    if (cloud.empty()) fail("invalid-cloud", "cannot voxelize an empty cloud");
    if (!(voxel_size > 0.0)) fail("invalid-argument", "voxel_size must be positive");

    const Aabb box = bounding_box(cloud.points);
    VoxelGrid grid;
    grid.voxel_size = voxel_size;
    grid.origin = box.min - Vec3::Constant(1.5 * voxel_size);
    for (int a = 0; a < 3; ++a) {
        const int top = static_cast<int>(std::floor((box.max[a] - box.min[a]) / voxel_size + 1.5));
        grid.dims[a] = std::max(top + 2, 3);
    }
    grid.occupancy.assign(grid.cell_count(), 0);
    for (const Vec3& p : cloud.points) {
        const Eigen::Vector3i c = grid.cell_of(p);
        grid.occupancy[grid.linear_index(c.x(), c.y(), c.z())] = 1;
    }
    return grid;
}

// Fills the distance channel with the exact Euclidean distance from each
// voxel center to the nearest cloud point, saturated at 10 voxel lengths.
inline void distance_transform(VoxelGrid& grid, const PointCloud& cloud) {
    if (cloud.empty()) fail("invalid-cloud", "distance transform needs a non-empty cloud");
    const double cap = 10.0 * grid.voxel_size;
    const KdTree tree(cloud.points);
    grid.distance.assign(grid.cell_count(), cap);
    for (int k = 0; k < grid.dims.z(); ++k)
        for (int j = 0; j < grid.dims.y(); ++j)
            for (int i = 0; i < grid.dims.x(); ++i) {
                const double d = std::sqrt(tree.nearest(grid.center(i, j, k)).sq_dist);
                grid.distance[grid.linear_index(i, j, k)] = std::min(d, cap);
            }
}

inline VoxelGrid voxelize_with_distance(const PointCloud& cloud, double voxel_size) {
    VoxelGrid grid = voxelize(cloud, voxel_size);
    distance_transform(grid, cloud);
    return grid;
}

}  // namespace asist
