#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "untangle/types.hpp"

namespace untangle {

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void expand(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void expand(const Aabb& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    Aabb inflated(double eps) const { return {lo.array() - eps, hi.array() + eps}; }
    Vec3 center() const { return 0.5 * (lo + hi); }
    bool overlaps(const Aabb& b) const {
        return (lo.array() <= b.hi.array()).all() && (hi.array() >= b.lo.array()).all();
    }
    bool contains(const Vec3& p) const {
        return (lo.array() <= p.array()).all() && (p.array() <= hi.array()).all();
    }
};

inline Aabb triangle_aabb(const Vec3& a, const Vec3& b, const Vec3& c) {
    Aabb box;
    box.expand(a);
    box.expand(b);
    box.expand(c);
    return box;
}

inline Aabb segment_aabb(const Vec3& p, const Vec3& q) {
    Aabb box;
    box.expand(p);
    box.expand(q);
    return box;
}

/// Static bounding volume hierarchy over a list of boxes. Built by median
/// split on the longest axis of the centroid bounds; immutable afterwards,
/// so concurrent queries are safe. Positions change between untangle
/// iterations, so the tree is rebuilt from scratch each time.
class Bvh {
public:
    static constexpr int kLeafSize = 4;

    static Bvh build(std::span<const Aabb> boxes) {
        if (boxes.empty()) throw std::runtime_error("Bvh::build: empty primitive list");
        Bvh bvh;
        bvh.boxes_.assign(boxes.begin(), boxes.end());
        bvh.order_.resize(boxes.size());
        std::iota(bvh.order_.begin(), bvh.order_.end(), 0);
        bvh.nodes_.reserve(2 * boxes.size());
        bvh.build_node(0, static_cast<int>(boxes.size()));
        return bvh;
    }

    /// Collects primitive indices whose boxes overlap `query`; ascending order.
    std::vector<int> query(const Aabb& query_box) const {
        std::vector<int> hits;
        collect(query_box, [&](int prim) { hits.push_back(prim); });
        std::sort(hits.begin(), hits.end());
        return hits;
    }

    std::vector<int> query_point(const Vec3& p) const { return query(Aabb{p, p}); }

    template <typename Fn>
    void collect(const Aabb& query_box, Fn&& fn) const {
        if (nodes_.empty()) return;
        int stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!node.box.overlaps(query_box)) continue;
            if (node.count > 0) {
                for (int i = node.first; i < node.first + node.count; ++i) {
                    const int prim = order_[i];
                    if (boxes_[prim].overlaps(query_box)) fn(prim);
                }
            } else {
                stack[top++] = node.left;
                stack[top++] = node.right;
            }
        }
    }

    int node_count() const { return static_cast<int>(nodes_.size()); }

private:
    struct Node {
        Aabb box;
        int left = -1, right = -1; // internal children
        int first = 0, count = 0;  // leaf range into order_
    };

    int build_node(int begin, int end) {
        Node node;
        Aabb centroid_bounds;
        for (int i = begin; i < end; ++i) {
            node.box.expand(boxes_[order_[i]]);
            centroid_bounds.expand(boxes_[order_[i]].center());
        }
        const int idx = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        if (end - begin <= kLeafSize) {
            nodes_[idx].first = begin;
            nodes_[idx].count = end - begin;
            return idx;
        }
        int axis = 0;
        const Vec3 extent = centroid_bounds.hi - centroid_bounds.lo;
        extent.maxCoeff(&axis);
        const int mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) {
                             const double ca = boxes_[a].center()[axis];
                             const double cb = boxes_[b].center()[axis];
                             if (ca != cb) return ca < cb;
                             return a < b; // deterministic tie-break
                         });
        const int left = build_node(begin, mid);
        const int right = build_node(mid, end);
        nodes_[idx].left = left;
        nodes_[idx].right = right;
        return idx;
    }

    std::vector<Node> nodes_;
    std::vector<Aabb> boxes_;
    std::vector<int> order_;
};

} // namespace untangle
