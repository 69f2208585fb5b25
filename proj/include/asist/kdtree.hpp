#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "asist/common.hpp"
#include "asist/point_cloud.hpp"

namespace asist {

struct Neighbor {
    int index = -1;
    double sq_dist = std::numeric_limits<double>::infinity();
};

// Static 3-d tree with median splits on the widest axis. Ties are broken by
// point index everywhere, so queries are reproducible across runs regardless
// of the order the input happened to be generated in.
class KdTree {
public:
    KdTree() = default;

    explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
        if (points_.empty()) fail("invalid-cloud", "cannot build a kd-tree on zero points");
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(2 * points_.size());
        root_ = build(0, static_cast<int>(points_.size()));
    }

    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] const std::vector<Vec3>& points() const { return points_; }

    [[nodiscard]] Neighbor nearest(const Vec3& query) const {
        Neighbor best;
        nearest_rec(root_, query, best);
        return best;
    }

    // k nearest neighbors sorted by (distance, index). Returns fewer than k
    // entries only when the tree holds fewer than k points.
    [[nodiscard]] std::vector<Neighbor> knn(const Vec3& query, int k) const {
        if (k <= 0) return {};
        std::vector<Neighbor> heap;  // max-heap on (sq_dist, index)
        heap.reserve(static_cast<std::size_t>(k) + 1);
        knn_rec(root_, query, k, heap);
        std::sort(heap.begin(), heap.end(), [](const Neighbor& a, const Neighbor& b) {
            if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
            return a.index < b.index;
        });
        return heap;
    }

    [[nodiscard]] std::vector<Neighbor> radius_search(const Vec3& query, double radius) const {
        std::vector<Neighbor> out;
        radius_rec(root_, query, radius * radius, out);
        std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
            if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
            return a.index < b.index;
        });
        return out;
    }

private:
    struct Node {
        int left = -1;
        int right = -1;
        int begin = 0;   // leaf: range into order_
        int end = 0;
        int axis = -1;   // -1 marks a leaf
        double split = 0.0;
    };

    static constexpr int kLeafSize = 16;

    int build(int begin, int end) {
        Node node;
        node.begin = begin;
        node.end = end;
        if (end - begin <= kLeafSize) {
            nodes_.push_back(node);
            return static_cast<int>(nodes_.size()) - 1;
        }
        Vec3 lo = points_[order_[begin]], hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            lo = lo.cwiseMin(points_[order_[i]]);
            hi = hi.cwiseMax(points_[order_[i]]);
        }
        int axis = 0;
        (hi - lo).maxCoeff(&axis);
        const int mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) {
                             const double va = points_[a][axis], vb = points_[b][axis];
                             if (va != vb) return va < vb;
                             return a < b;
                         });
        node.axis = axis;
        node.split = points_[order_[mid]][axis];
        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        const int left = build(begin, mid);
        const int right = build(mid, end);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    void scan_leaf(const Node& node, const Vec3& query, Neighbor& best) const {
        for (int i = node.begin; i < node.end; ++i) {
            const int idx = order_[i];
            const double d = (points_[idx] - query).squaredNorm();
            if (d < best.sq_dist || (d == best.sq_dist && idx < best.index)) best = {idx, d};
        }
    }

    void nearest_rec(int ni, const Vec3& query, Neighbor& best) const {
        const Node& node = nodes_[ni];
        if (node.axis < 0) {
            scan_leaf(node, query, best);
            return;
        }
        const double delta = query[node.axis] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        nearest_rec(near, query, best);
        if (delta * delta <= best.sq_dist) nearest_rec(far, query, best);
    }

    static bool heap_less(const Neighbor& a, const Neighbor& b) {
        // "less" = better kept; on distance ties the smaller index wins
        if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
        return a.index < b.index;
    }

    void knn_rec(int ni, const Vec3& query, int k, std::vector<Neighbor>& heap) const {
        const Node& node = nodes_[ni];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[i];
                const double d = (points_[idx] - query).squaredNorm();
                if (static_cast<int>(heap.size()) < k) {
                    heap.push_back({idx, d});
                    std::push_heap(heap.begin(), heap.end(), heap_less);
                } else if (heap_less({idx, d}, heap.front())) {
                    std::pop_heap(heap.begin(), heap.end(), heap_less);
                    heap.back() = {idx, d};
                    std::push_heap(heap.begin(), heap.end(), heap_less);
                }
            }
            return;
        }
        const double delta = query[node.axis] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        knn_rec(near, query, k, heap);
        if (static_cast<int>(heap.size()) < k || delta * delta <= heap.front().sq_dist)
            knn_rec(far, query, k, heap);
    }

    void radius_rec(int ni, const Vec3& query, double sq_radius, std::vector<Neighbor>& out) const {
        const Node& node = nodes_[ni];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[i];
                const double d = (points_[idx] - query).squaredNorm();
                if (d <= sq_radius) out.push_back({idx, d});
            }
            return;
        }
        const double delta = query[node.axis] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        radius_rec(near, query, sq_radius, out);
        if (delta * delta <= sq_radius) radius_rec(far, query, sq_radius, out);
    }

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace asist
