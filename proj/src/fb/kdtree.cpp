#include "fb/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace fb {

namespace {
constexpr int kLeafSize = 8;
}

void KdTree3::build(const std::vector<Vec3>& points) {
    points_ = points;
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.clear();
    nodes_.reserve(points_.empty() ? 0 : 2 * points_.size() / kLeafSize + 8);
    root_ = points_.empty() ? -1 : build_range(0, static_cast<int>(points_.size()));
}

int KdTree3::build_range(int begin, int end) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Node node;
    node.begin = begin;
    node.end = end;

    if (end - begin > kLeafSize) {
        Vec3 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                std::numeric_limits<double>::max());
        Vec3 hi = -lo;
        for (int i = begin; i < end; ++i) {
            const Vec3& p = points_[order_[i]];
            for (int a = 0; a < 3; ++a) {
                if (p[a] < lo[a]) lo.set(a, p[a]);
                if (p[a] > hi[a]) hi.set(a, p[a]);
            }
        }
        int axis = 0;
        double width = hi.x - lo.x;
        if (hi.y - lo.y > width) { axis = 1; width = hi.y - lo.y; }
        if (hi.z - lo.z > width) { axis = 2; width = hi.z - lo.z; }

        if (width > 0.0) {
            int mid = (begin + end) / 2;
            std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                             [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
            node.axis = axis;
            node.split = points_[order_[mid]][axis];
            node.left = build_range(begin, mid);
            node.right = build_range(mid, end);
        }
    }

    nodes_[id] = node;
    return id;
}

std::pair<int, double> KdTree3::nearest(const Vec3& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::max();
    if (root_ >= 0) nearest_recurse(root_, q, best, best_d2);
    return {best, best < 0 ? best_d2 : std::sqrt(best_d2)};
}

void KdTree3::nearest_recurse(int node_id, const Vec3& q, int& best, double& best_d2) const {
    const Node& node = nodes_[node_id];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            double d2 = norm2(points_[order_[i]] - q);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = order_[i];
            }
        }
        return;
    }
    double delta = q[node.axis] - node.split;
    int near = delta < 0.0 ? node.left : node.right;
    int far = delta < 0.0 ? node.right : node.left;
    nearest_recurse(near, q, best, best_d2);
    if (delta * delta < best_d2) nearest_recurse(far, q, best, best_d2);
}

std::vector<int> KdTree3::k_nearest(const Vec3& q, int k) const {
    std::vector<std::pair<double, int>> heap; // max-heap on distance^2
    if (root_ >= 0 && k > 0) k_nearest_recurse(root_, q, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    std::vector<int> out;
    out.reserve(heap.size());
    for (const auto& [d2, idx] : heap) out.push_back(idx);
    return out;
}

void KdTree3::k_nearest_recurse(int node_id, const Vec3& q, int k,
                                std::vector<std::pair<double, int>>& heap) const {
    const Node& node = nodes_[node_id];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            double d2 = norm2(points_[order_[i]] - q);
            if (static_cast<int>(heap.size()) < k) {
                heap.emplace_back(d2, order_[i]);
                std::push_heap(heap.begin(), heap.end());
            } else if (d2 < heap.front().first) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = {d2, order_[i]};
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    double delta = q[node.axis] - node.split;
    int near = delta < 0.0 ? node.left : node.right;
    int far = delta < 0.0 ? node.right : node.left;
    k_nearest_recurse(near, q, k, heap);
    if (static_cast<int>(heap.size()) < k || delta * delta < heap.front().first)
        k_nearest_recurse(far, q, k, heap);
}

} // namespace fb
