#include "facemorph/alignment.hpp"

#include "facemorph/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace facemorph {

namespace {

void require_indices(std::span<const Point2> points, std::size_t a, std::size_t b) {
    if (a >= points.size() || b >= points.size())
        throw Error(ErrorCode::InvalidArgument, "alignment landmark index beyond point count");
}

AlignedFace finish(std::vector<Point2> points, std::size_t eye_l, std::size_t eye_r) {
    AlignedFace out;
    out.eye_l = eye_l;
    out.eye_r = eye_r;
    out.interocular_px = distance(points[eye_l], points[eye_r]);
    out.midline_x = (points[eye_l].x + points[eye_r].x) / 2.0;
    out.points = std::move(points);
    return out;
}

}  // namespace

AlignedFace align_outer_eyes(std::span<const Point2> points, const LandmarkScheme& scheme) {
    const std::size_t il = scheme.outer_eye_l;
    const std::size_t ir = scheme.outer_eye_r;
    require_indices(points, il, ir);
    const Point2 src_l = points[il];
    const Point2 src = points[ir] - src_l;
    const double len2 = src.x * src.x + src.y * src.y;
    if (!(std::sqrt(len2) >= kMinEyeDistance))
        throw Error(ErrorCode::DegenerateEyeDistance, "outer eye corners coincide");

    // Complex factor (a + ib) = dst / src rotates and scales in one step.
    const Point2 dst = kCanonicalOuterEyeR - kCanonicalOuterEyeL;
    const double a = (dst.x * src.x + dst.y * src.y) / len2;
    const double b = (dst.y * src.x - dst.x * src.y) / len2;

    std::vector<Point2> out;
    out.reserve(points.size());
    for (const Point2& p : points) {
        const Point2 d = p - src_l;
        out.push_back({a * d.x - b * d.y + kCanonicalOuterEyeL.x, b * d.x + a * d.y + kCanonicalOuterEyeL.y});
    }
    // Pin the fixed points so the leveling invariant holds exactly.
    out[il] = kCanonicalOuterEyeL;
    out[ir] = kCanonicalOuterEyeR;
    return finish(std::move(out), il, ir);
}

AlignedFace align_outer_eyes(const LandmarkSet& face, const LandmarkScheme& scheme) {
    return align_outer_eyes(face.points(), scheme);
}

AlignedFace align_inner_eyes(std::span<const Point2> points, const LandmarkScheme& scheme) {
    const std::size_t il = scheme.inner_eye_l;
    const std::size_t ir = scheme.inner_eye_r;
    require_indices(points, il, ir);
    const Point2 v = points[ir] - points[il];
    if (!(std::hypot(v.x, v.y) >= kMinEyeDistance))
        throw Error(ErrorCode::DegenerateEyeDistance, "inner eye corners coincide");

    auto bbox = [](std::span<const Point2> pts) {
        auto [minx, maxx] = std::minmax_element(pts.begin(), pts.end(), [](auto& p, auto& q) { return p.x < q.x; });
        auto [miny, maxy] = std::minmax_element(pts.begin(), pts.end(), [](auto& p, auto& q) { return p.y < q.y; });
        return std::array<double, 4>{minx->x, miny->y, maxx->x, maxy->y};
    };

    const auto box = bbox(points);
    const Point2 center{(box[0] + box[2]) / 2.0, (box[1] + box[3]) / 2.0};

    // Rotate by -angle using the unit direction directly; exact for level input.
    const double len = std::hypot(v.x, v.y);
    const double c = v.x / len;
    const double s = v.y / len;
    std::vector<Point2> rotated;
    rotated.reserve(points.size());
    for (const Point2& p : points) {
        const Point2 d = p - center;
        rotated.push_back({c * d.x + s * d.y + center.x, -s * d.x + c * d.y + center.y});
    }
    // Both eye corners share one y after rotation; pin it to remove rounding.
    const double eye_y = (rotated[il].y + rotated[ir].y) / 2.0;
    rotated[il].y = eye_y;
    rotated[ir].y = eye_y;

    const auto rbox = bbox(rotated);
    const double extent = std::max(rbox[2] - rbox[0], rbox[3] - rbox[1]);
    const double scale = (kCanvasSize - 2.0 * kPaddingMargin) / extent;
    const Point2 rcenter{(rbox[0] + rbox[2]) / 2.0, (rbox[1] + rbox[3]) / 2.0};
    const double half = kCanvasSize / 2.0;
    for (Point2& p : rotated) p = {(p.x - rcenter.x) * scale + half, (p.y - rcenter.y) * scale + half};
    return finish(std::move(rotated), il, ir);
}

AlignedFace align_inner_eyes(const LandmarkSet& face, const LandmarkScheme& scheme) {
    return align_inner_eyes(face.points(), scheme);
}

double midline(const AlignedFace& aligned) {
    return (aligned.points[aligned.eye_l].x + aligned.points[aligned.eye_r].x) / 2.0;
}

std::string aligned_record_json(const AlignedFace& aligned, const std::string& image_id, const std::string& subject_id,
                                Role role) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kRecordSchemaVersion;
    doc["image_id"] = image_id;
    doc["subject_id"] = subject_id;
    doc["role"] = to_string(role);
    doc["width"] = static_cast<int>(aligned.canvas);
    doc["height"] = static_cast<int>(aligned.canvas);
    doc["coord_mode"] = "pixel";
    auto lm = nlohmann::ordered_json::array();
    for (const Point2& p : aligned.points) lm.push_back({p.x, p.y});
    doc["landmarks"] = std::move(lm);
    doc["apparent_age"] = nullptr;
    doc["embedding"] = nullptr;
    return doc.dump();
}

}  // namespace facemorph
