#include "facemorph/kdtree.hpp"

#include "facemorph/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace facemorph {

namespace {

inline double coord(Point2 p, unsigned axis) { return axis == 0 ? p.x : p.y; }

inline bool closer(double d2, std::size_t index, const Neighbor& best) {
    return d2 < best.squared_distance || (d2 == best.squared_distance && index < best.index);
}

}  // namespace

KdTree2::KdTree2(std::span<const IndexedPoint> points) {
    if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "cannot build a KD-tree from zero points");
    for (const auto& ip : points) {
        if (!std::isfinite(ip.point.x) || !std::isfinite(ip.point.y))
            throw Error(ErrorCode::InvalidArgument, "KD-tree point " + std::to_string(ip.index) + " is not finite");
    }
    std::vector<IndexedPoint> items(points.begin(), points.end());
    nodes_.reserve(items.size());
    root_ = build(items, 0, items.size(), 0);
}

int KdTree2::build(std::vector<IndexedPoint>& items, std::size_t lo, std::size_t hi, unsigned depth) {
    if (lo >= hi) return -1;
    const unsigned axis = depth % 2;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(items.begin() + static_cast<std::ptrdiff_t>(lo), items.begin() + static_cast<std::ptrdiff_t>(mid),
                     items.begin() + static_cast<std::ptrdiff_t>(hi), [axis](const IndexedPoint& a, const IndexedPoint& b) {
                         const double ca = coord(a.point, axis);
                         const double cb = coord(b.point, axis);
                         return ca < cb || (ca == cb && a.index < b.index);
                     });
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{items[mid], -1, -1, static_cast<unsigned char>(axis)});
    const int left = build(items, lo, mid, depth + 1);
    const int right = build(items, mid + 1, hi, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

void KdTree2::search(int node, Point2 query, Neighbor& best) const {
    if (node < 0) return;
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    const double d2 = squared_distance(query, n.item.point);
    if (closer(d2, n.item.index, best)) {
        best.point = n.item.point;
        best.index = n.item.index;
        best.squared_distance = d2;
    }
    const double diff = coord(query, n.axis) - coord(n.item.point, n.axis);
    const int near_side = diff < 0.0 ? n.left : n.right;
    const int far_side = diff < 0.0 ? n.right : n.left;
    search(near_side, query, best);
    // Visit the far side on equality too, so index tie-breaks stay exact.
    if (diff * diff <= best.squared_distance) search(far_side, query, best);
}

Neighbor KdTree2::nearest(Point2 query) const {
    Neighbor best;
    best.squared_distance = std::numeric_limits<double>::infinity();
    best.index = std::numeric_limits<std::size_t>::max();
    search(root_, query, best);
    best.distance = std::sqrt(best.squared_distance);
    return best;
}

}  // namespace facemorph
