#pragma once

#include "facemorph/alignment.hpp"
#include "facemorph/geometry.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace facemorph {

struct SymmetryMatch {
    std::size_t left_index = 0;
    std::size_t right_index = 0;
    double distance = 0.0;
};

struct SymmetryResult {
    double score = 0.0;  // mean match distance, canonical px
    std::size_t n_left = 0;
    std::size_t n_right = 0;
    std::vector<SymmetryMatch> per_landmark;
};

/// Reflection-matching symmetry error. Points strictly left of `midline_x`
/// are mirrored across it and matched to their nearest strictly-right point;
/// points on the midline belong to neither side. Throws EmptySide.
SymmetryResult symmetry_score(std::span<const Point2> points, double midline_x);
SymmetryResult symmetry_score(const AlignedFace& aligned);

struct SymmetryDelta {
    double delta = 0.0;  // post - pre
    bool improved = false;
};

/// Improvement requires a strict decrease.
SymmetryDelta symmetry_delta(const SymmetryResult& pre, const SymmetryResult& post);

std::string symmetry_csv_header();
std::string symmetry_csv_row(const std::string& image_id, const SymmetryResult& result);

}  // namespace facemorph
