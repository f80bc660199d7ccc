#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fb/vec3.hpp"

namespace fb {

// Static 3-d KD-tree over a point set. Built once, queried read-only, so it is
// safe to share across workers. Median split on the widest axis; queries are
// O(log n) on the point sets this project produces.
class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(const std::vector<Vec3>& points) { build(points); }

    void build(const std::vector<Vec3>& points);

    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }
    const Vec3& point(int index) const { return points_[index]; }

    // Index and distance of the closest point to q.
    std::pair<int, double> nearest(const Vec3& q) const;

    // Indices of the k closest points, nearest first. Returns fewer when the
    // set is smaller than k.
    std::vector<int> k_nearest(const Vec3& q, int k) const;

private:
    struct Node {
        int left = -1;
        int right = -1;
        int begin = 0; // leaf range into order_
        int end = 0;
        int axis = 0;
        double split = 0.0;
    };

    int build_range(int begin, int end);
    void nearest_recurse(int node, const Vec3& q, int& best, double& best_d2) const;
    void k_nearest_recurse(int node, const Vec3& q, int k,
                           std::vector<std::pair<double, int>>& heap) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace fb
