#pragma once

#include <cstdint>
#include <vector>

#include "asist/kdtree.hpp"
#include "asist/voxel_grid.hpp"

namespace asist {

// An m x m x m voxel patch centered on an occupied voxel: the classification
// unit. Local voxel (i,j,k) in [0,m)^3 maps to grid voxel
// center + (i,j,k) - (m/2,m/2,m/2); reads beyond the grid are unoccupied with
// saturated distance. `height` is the world z of the center voxel's center.
struct Cell {
    int m = 0;
    Eigen::Vector3i center = Eigen::Vector3i::Zero();
    double height = 0.0;
    std::vector<std::uint8_t> occupancy;  // m^3
    std::vector<float> distance;          // m^3

    [[nodiscard]] int volume() const { return m * m * m; }
    [[nodiscard]] int local_index(int i, int j, int k) const { return i + m * (j + m * k); }
    [[nodiscard]] double channel_value(bool use_distance, int linear) const {
        return use_distance ? static_cast<double>(distance[linear])
                            : static_cast<double>(occupancy[linear]);
    }
};

inline Cell extract_cell(const VoxelGrid& grid, const Eigen::Vector3i& center, int m) {
    if (m < 1 || m % 2 == 0) fail("invalid-argument", "cell side m must be odd and positive");
    if (!grid.occupied(center.x(), center.y(), center.z()))
        fail("center-not-occupied", "cell centers must be occupied voxels");

    Cell cell;
    cell.m = m;
    cell.center = center;
    cell.height = grid.center(center.x(), center.y(), center.z()).z();
    cell.occupancy.resize(cell.volume());
    cell.distance.resize(cell.volume());
    const int h = m / 2;
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const int gi = center.x() + i - h;
                const int gj = center.y() + j - h;
                const int gk = center.z() + k - h;
                const int lin = cell.local_index(i, j, k);
                cell.occupancy[lin] = grid.occupied(gi, gj, gk) ? 1 : 0;
                cell.distance[lin] = static_cast<float>(grid.distance_at(gi, gj, gk));
            }
    return cell;
}

// One cell per occupied voxel plus, when the cloud carries ground-truth
// labels, a training label: the label of the point nearest the voxel center
// if it lies within 1.5 voxel lengths, clutter (0) otherwise.
inline void extract_training_cells(const VoxelGrid& grid, const PointCloud& cloud, int m,
                                   std::vector<Cell>& cells, std::vector<int>& labels) {
    if (!cloud.has_labels()) fail("invalid-cloud", "training cells need a labeled cloud");
    const KdTree tree(cloud.points);
    const double max_label_dist = 1.5 * grid.voxel_size;
    for (int k = 0; k < grid.dims.z(); ++k)
        for (int j = 0; j < grid.dims.y(); ++j)
            for (int i = 0; i < grid.dims.x(); ++i) {
                if (!grid.occupied(i, j, k)) continue;
                cells.push_back(extract_cell(grid, {i, j, k}, m));
                const Neighbor nn = tree.nearest(grid.center(i, j, k));
                const bool close = std::sqrt(nn.sq_dist) <= max_label_dist;
                labels.push_back(close ? cloud.labels[nn.index] : 0);
            }
}

inline std::vector<Eigen::Vector3i> occupied_voxels(const VoxelGrid& grid) {
    std::vector<Eigen::Vector3i> out;
    for (int k = 0; k < grid.dims.z(); ++k)
        for (int j = 0; j < grid.dims.y(); ++j)
            for (int i = 0; i < grid.dims.x(); ++i)
                if (grid.occupied(i, j, k)) out.push_back({i, j, k});
    return out;
}

}  // namespace asist
