#pragma once

#include "facemorph/geometry.hpp"
#include "facemorph/landmarks.hpp"

#include <span>
#include <string>
#include <vector>

namespace facemorph {

inline constexpr double kCanvasSize = 512.0;
inline constexpr Point2 kCanonicalOuterEyeL{156.0, 256.0};
inline constexpr Point2 kCanonicalOuterEyeR{356.0, 256.0};
inline constexpr double kCanonicalInterocular = 200.0;
inline constexpr double kPaddingMargin = 16.0;
inline constexpr double kMinEyeDistance = 1e-6;

/// Landmarks in the 512x512 canonical frame. `eye_l`/`eye_r` name the pair the
/// alignment leveled; the midline is the mean x of that pair.
struct AlignedFace {
    std::vector<Point2> points;
    double canvas = kCanvasSize;
    std::size_t eye_l = 0;
    std::size_t eye_r = 0;
    double interocular_px = 0.0;
    double midline_x = 0.0;
};

/// Similarity transform taking the outer eye corners to (156,256) and (356,256).
AlignedFace align_outer_eyes(std::span<const Point2> points, const LandmarkScheme& scheme = {});
AlignedFace align_outer_eyes(const LandmarkSet& face, const LandmarkScheme& scheme = {});

/// Levels the inner eye corners by rotating about the landmark bounding-box
/// center, then scales and translates so the box sits centered in the canvas
/// with a 16 px margin on its longer side.
AlignedFace align_inner_eyes(std::span<const Point2> points, const LandmarkScheme& scheme = {});
AlignedFace align_inner_eyes(const LandmarkSet& face, const LandmarkScheme& scheme = {});

/// Midpoint x of the aligned eye pair.
double midline(const AlignedFace& aligned);

/// Debug dump of an aligned face in the record JSON schema (pixel mode, 512x512).
std::string aligned_record_json(const AlignedFace& aligned, const std::string& image_id, const std::string& subject_id,
                                Role role);

}  // namespace facemorph
