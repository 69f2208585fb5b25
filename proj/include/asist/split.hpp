#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "asist/cell.hpp"
#include "asist/common.hpp"

namespace asist {

enum class SplitFamily : int { Height = 0, RotationInvariant, Box, HorizontalSlab, Pixelwise };
enum class CellChannel : int { Occupancy = 0, Distance, Height };

inline int radial_bin_count(int m) { return (m + 1) / 2; }

// Integer radius bin of local voxel (i,j) about the cell center; exactly
// invariant under quarter turns of the lattice about the z axis.
inline int radial_bin(int i, int j, int m) {
    const int h = m / 2;
    const double r = std::sqrt(double((i - h) * (i - h) + (j - h) * (j - h)));
    return std::min(static_cast<int>(std::floor(r + 0.5)), radial_bin_count(m) - 1);
}

// One thresholded linear functional of a cell's base features. `tau` is
// assigned by the trainer from the responses observed at the node.
struct SplitFunction {
    SplitFamily family = SplitFamily::Height;
    CellChannel channel = CellChannel::Height;
    double tau = 0.0;

    std::vector<double> radial;            // RotationInvariant: [r + n_r * z_bin]
    Eigen::Vector3i box_lo = Eigen::Vector3i::Zero();  // Box: inclusive corners
    Eigen::Vector3i box_hi = Eigen::Vector3i::Zero();
    int slab_z = 0;                        // HorizontalSlab: offset from center in [-m/2, m/2]
    int pixel_count = 0;                   // Pixelwise: up to 3 (voxel, coefficient) pairs
    std::array<int, 3> pixel_index{{0, 0, 0}};
    std::array<int, 3> pixel_coef{{0, 0, 0}};
};

// Raw linear response u^T h_k of the split on a cell (before thresholding).
inline double split_response(const SplitFunction& s, const Cell& cell) {
    const bool dist = s.channel == CellChannel::Distance;
    const int m = cell.m;
    switch (s.family) {
        case SplitFamily::Height:
            return cell.height;
        case SplitFamily::RotationInvariant: {
            const int n_r = radial_bin_count(m);
            double acc = 0.0;
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < m; ++i)
                        acc += s.radial[radial_bin(i, j, m) + n_r * k] *
                               cell.channel_value(dist, cell.local_index(i, j, k));
            return acc;
        }
        case SplitFamily::Box: {
            double acc = 0.0;
            for (int k = s.box_lo.z(); k <= s.box_hi.z(); ++k)
                for (int j = s.box_lo.y(); j <= s.box_hi.y(); ++j)
                    for (int i = s.box_lo.x(); i <= s.box_hi.x(); ++i)
                        acc += cell.channel_value(dist, cell.local_index(i, j, k));
            return acc;
        }
        case SplitFamily::HorizontalSlab: {
            const int k = s.slab_z + m / 2;
            double acc = 0.0;
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i)
                    acc += cell.channel_value(dist, cell.local_index(i, j, k));
            return acc;
        }
        case SplitFamily::Pixelwise: {
            double acc = 0.0;
            for (int t = 0; t < s.pixel_count; ++t)
                acc += s.pixel_coef[t] * cell.channel_value(dist, s.pixel_index[t]);
            return acc;
        }
    }
    return 0.0;
}

inline bool eval_split(const SplitFunction& s, const Cell& cell) {
    return split_response(s, cell) > s.tau;
}

// Draws family, channel and family parameters; tau stays 0 until the trainer
// scales it to the node's response range.
inline SplitFunction sample_split(Rng& rng, int m) {
    SplitFunction s;
    s.family = static_cast<SplitFamily>(rng.uniform_index(5));
    if (s.family == SplitFamily::Height) {
        s.channel = CellChannel::Height;
    } else {
        s.channel = rng.uniform_index(2) == 0 ? CellChannel::Occupancy : CellChannel::Distance;
    }
    switch (s.family) {
        case SplitFamily::Height:
            break;
        case SplitFamily::RotationInvariant: {
            s.radial.resize(static_cast<std::size_t>(radial_bin_count(m)) * m);
            for (double& u : s.radial) u = rng.uniform(-1.0, 1.0);
            break;
        }
        case SplitFamily::Box: {
            for (int a = 0; a < 3; ++a) {
                const int lo = rng.uniform_int(0, m - 1);
                const int hi = rng.uniform_int(lo, m - 1);
                s.box_lo[a] = lo;
                s.box_hi[a] = hi;
            }
            break;
        }
        case SplitFamily::HorizontalSlab:
            s.slab_z = rng.uniform_int(-(m / 2), m / 2);
            break;
        case SplitFamily::Pixelwise: {
            s.pixel_count = rng.uniform_int(1, 3);
            for (int t = 0; t < s.pixel_count; ++t) {
                s.pixel_index[t] = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(m) * m * m));
                s.pixel_coef[t] = rng.uniform_int(-1, 1);
            }
            break;
        }
    }
    return s;
}

inline const char* family_name(SplitFamily f) {
    switch (f) {
        case SplitFamily::Height: return "height";
        case SplitFamily::RotationInvariant: return "rotation-invariant";
        case SplitFamily::Box: return "box";
        case SplitFamily::HorizontalSlab: return "horizontal-slab";
        case SplitFamily::Pixelwise: return "pixelwise";
    }
    return "?";
}

inline SplitFamily family_from_name(const std::string& name) {
    for (int f = 0; f < 5; ++f)
        if (name == family_name(static_cast<SplitFamily>(f))) return static_cast<SplitFamily>(f);
    fail("parse-error", "unknown split family '" + name + "'");
}

inline const char* channel_name(CellChannel c) {
    switch (c) {
        case CellChannel::Occupancy: return "occupancy";
        case CellChannel::Distance: return "distance";
        case CellChannel::Height: return "height";
    }
    return "?";
}

inline CellChannel channel_from_name(const std::string& name) {
    for (int c = 0; c < 3; ++c)
        if (name == channel_name(static_cast<CellChannel>(c))) return static_cast<CellChannel>(c);
    fail("parse-error", "unknown cell channel '" + name + "'");
}

}  // namespace asist
