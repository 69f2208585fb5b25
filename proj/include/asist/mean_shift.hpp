#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "asist/common.hpp"
#include "asist/point_cloud.hpp"

namespace asist {

struct Mode {
    Vec2 position = Vec2::Zero();
    double weight = 0.0;  // kernel-weighted mass gathered at the mode
};

namespace mean_shift_detail {

inline double kernel_mass(const std::vector<Vec2>& pts, const std::vector<double>& weights,
                          const Vec2& x, double bandwidth) {
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        acc += weights[i] * std::exp(-(pts[i] - x).squaredNorm() * inv);
    return acc;
}

}  // namespace mean_shift_detail

// One Gaussian mean-shift ascent from `start`; returns the converged point.
// When `kde_trace` is given it receives the weighted kernel density after
// every step (a non-decreasing sequence for the Gaussian kernel).
inline Vec2 mean_shift_ascend(const std::vector<Vec2>& pts, const std::vector<double>& weights,
                              double bandwidth, Vec2 start, std::vector<double>* kde_trace = nullptr,
                              int max_iters = 100) {
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    Vec2 x = start;
    if (kde_trace) kde_trace->push_back(mean_shift_detail::kernel_mass(pts, weights, x, bandwidth));
    for (int it = 0; it < max_iters; ++it) {
        Vec2 num = Vec2::Zero();
        double den = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double k = weights[i] * std::exp(-(pts[i] - x).squaredNorm() * inv);
            num += k * pts[i];
            den += k;
        }
        if (den < 1e-300) break;  // started in a void: nothing to climb
        const Vec2 next = num / den;
        const double step = (next - x).norm();
        x = next;
        if (kde_trace) kde_trace->push_back(mean_shift_detail::kernel_mass(pts, weights, x, bandwidth));
        if (step < 1e-3 * bandwidth) break;
    }
    return x;
}

// Greedy agglomeration: repeatedly merge the closest-conflicting pair (walking
// modes in descending weight order) into their weight-weighted mean until all
// survivors are at least 1.5 bandwidths apart.
inline std::vector<Mode> merge_modes(std::vector<Mode> modes, double bandwidth) {
    const double min_sep = 1.5 * bandwidth;
    bool merged = true;
    while (merged) {
        merged = false;
        std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            if (a.position.x() != b.position.x()) return a.position.x() < b.position.x();
            return a.position.y() < b.position.y();
        });
        for (std::size_t i = 0; i < modes.size() && !merged; ++i)
            for (std::size_t j = i + 1; j < modes.size() && !merged; ++j) {
                if ((modes[i].position - modes[j].position).norm() >= min_sep) continue;
                const double total = modes[i].weight + modes[j].weight;
                modes[i].position = (modes[i].weight * modes[i].position +
                                     modes[j].weight * modes[j].position) / total;
                modes[i].weight = total;
                modes.erase(modes.begin() + static_cast<std::ptrdiff_t>(j));
                merged = true;
            }
    }
    return modes;
}

// Weighted mode seeking on the xy-projection: Gaussian mean shift started
// from a bandwidth-spaced grid over the weighted footprint, converged modes
// deduplicated, merged, and filtered against a mass floor of 1% of the total
// weight. All-zero weights yield an empty list.
inline std::vector<Mode> weighted_mean_shift(const PointCloud& cloud,
                                             const std::vector<double>& weights, double bandwidth) {
    if (cloud.size() != weights.size()) fail("invalid-argument", "one weight per point required");
    if (!(bandwidth > 0.0)) fail("invalid-argument", "bandwidth must be positive");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) fail("invalid-argument", "mean-shift weights must be nonnegative");
        total += w;
    }
    if (total <= 0.0) return {};

    // zero-weight points contribute nothing to any kernel sum; drop them once
    std::vector<Vec2> pts;
    std::vector<double> w;
    pts.reserve(cloud.size());
    w.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (weights[i] > 0.0) {
            pts.push_back(cloud.points[i].head<2>());
            w.push_back(weights[i]);
        }

    // footprint of the points that actually carry weight
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (w[i] <= 1e-12 * total) continue;
        lo = lo.cwiseMin(pts[i]);
        hi = hi.cwiseMax(pts[i]);
    }

    std::vector<Mode> modes;
    const int nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / bandwidth)) + 1;
    const int ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / bandwidth)) + 1;
    for (int gy = 0; gy < ny; ++gy)
        for (int gx = 0; gx < nx; ++gx) {
            const Vec2 start = lo + bandwidth * Vec2(gx, gy);
            if (mean_shift_detail::kernel_mass(pts, w, start, bandwidth) <= 1e-9 * total)
                continue;
            const Vec2 converged = mean_shift_ascend(pts, w, bandwidth, start);
            const double mass = mean_shift_detail::kernel_mass(pts, w, converged, bandwidth);
            bool duplicate = false;
            for (Mode& m : modes)
                if ((m.position - converged).norm() < 0.25 * bandwidth) {
                    if (mass > m.weight) m = {converged, mass};
                    duplicate = true;
                    break;
                }
            if (!duplicate) modes.push_back({converged, mass});
        }

    modes = merge_modes(std::move(modes), bandwidth);
    std::vector<Mode> kept;
    for (const Mode& m : modes)
        if (m.weight >= 0.01 * total) kept.push_back(m);
    return kept;
}

}  // namespace asist
