#pragma once

#include "facemorph/geometry.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace facemorph {

struct IndexedPoint {
    Point2 point;
    std::size_t index = 0;
};

struct Neighbor {
    Point2 point;
    std::size_t index = 0;
    double distance = 0.0;
    double squared_distance = 0.0;
};

/// Balanced 2D KD-tree (median split, alternating axes) for exact nearest
/// neighbor lookup. Equidistant candidates resolve to the smallest payload index.
class KdTree2 {
public:
    /// Throws EmptyPointSet for empty input and InvalidArgument for non-finite coordinates.
    explicit KdTree2(std::span<const IndexedPoint> points);

    Neighbor nearest(Point2 query) const;
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        IndexedPoint item;
        int left = -1;
        int right = -1;
        unsigned char axis = 0;
    };

    int build(std::vector<IndexedPoint>& items, std::size_t lo, std::size_t hi, unsigned depth);
    void search(int node, Point2 query, Neighbor& best) const;

    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace facemorph
