#include "facemorph/symmetry.hpp"

#include "facemorph/error.hpp"
#include "facemorph/kdtree.hpp"

#include <fmt/format.h>

namespace facemorph {

SymmetryResult symmetry_score(std::span<const Point2> points, double midline_x) {
    std::vector<IndexedPoint> right;
    std::vector<IndexedPoint> left;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].x < midline_x) left.push_back({points[i], i});
        else if (points[i].x > midline_x) right.push_back({points[i], i});
    }
    if (left.empty() || right.empty())
        throw Error(ErrorCode::EmptySide, fmt::format("left={} right={} landmarks around midline x={}", left.size(),
                                                      right.size(), midline_x));

    const KdTree2 tree(right);
    SymmetryResult out;
    out.n_left = left.size();
    out.n_right = right.size();
    out.per_landmark.reserve(left.size());
    double sum = 0.0;
    for (const auto& lp : left) {
        const Point2 reflected{2.0 * midline_x - lp.point.x, lp.point.y};
        const Neighbor nn = tree.nearest(reflected);
        const Point2 back{2.0 * midline_x - nn.point.x, nn.point.y};
        const double d = distance(lp.point, back);
        out.per_landmark.push_back({lp.index, nn.index, d});
        sum += d;
    }
    out.score = sum / static_cast<double>(left.size());
    return out;
}

SymmetryResult symmetry_score(const AlignedFace& aligned) { return symmetry_score(aligned.points, aligned.midline_x); }

SymmetryDelta symmetry_delta(const SymmetryResult& pre, const SymmetryResult& post) {
    const double delta = post.score - pre.score;
    return {delta, delta < 0.0};
}

std::string symmetry_csv_header() { return "image_id,score,n_left,n_right"; }

std::string symmetry_csv_row(const std::string& image_id, const SymmetryResult& result) {
    return fmt::format("{},{:.17g},{},{}", image_id, result.score, result.n_left, result.n_right);
}

}  // namespace facemorph
