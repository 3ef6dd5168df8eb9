#pragma once

#include "facemorph/geometry.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facemorph {

inline constexpr std::size_t kLandmarkCount = 468;
inline constexpr int kRecordSchemaVersion = 1;

/// Index table for the 468-point face mesh. Image-left entries (`*_l`) sit at
/// smaller x than their `*_r` counterparts on a frontal face.
struct LandmarkScheme {
    std::size_t outer_eye_l = 33;
    std::size_t outer_eye_r = 263;
    std::size_t nose_tip = 1;
    std::size_t nostril_l = 98;
    std::size_t nostril_r = 327;
    std::size_t inner_eye_l = 133;
    std::size_t inner_eye_r = 362;
    std::size_t cheek_l = 234;
    std::size_t cheek_r = 454;
    std::size_t chin = 152;
    std::size_t forehead = 10;
    std::size_t glabella = 168;
    // Nose-length endpoints; glabella to tip by default.
    std::size_t nose_length_top = 168;
    std::size_t nose_length_bottom = 1;

    /// Throws InvalidArgument if an index is out of range or a left/right pair collides.
    void validate() const;
};

enum class CoordMode { pixel, normalized };
enum class Role { pre, post };

std::string_view to_string(CoordMode mode) noexcept;
std::string_view to_string(Role role) noexcept;

/// 468 keypoints of one face in pixel units. Construction validates the
/// count, image size, and coordinate range.
class LandmarkSet {
public:
    LandmarkSet(std::vector<Point2> points, double image_width, double image_height,
                CoordMode source_mode = CoordMode::pixel);

    std::span<const Point2> points() const noexcept { return points_; }
    const Point2& operator[](std::size_t i) const { return points_.at(i); }
    double image_width() const noexcept { return width_; }
    double image_height() const noexcept { return height_; }
    CoordMode coord_mode() const noexcept { return mode_; }

    friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

private:
    std::vector<Point2> points_;
    double width_;
    double height_;
    CoordMode mode_;
};

struct FaceRecord {
    std::string image_id;
    std::string subject_id;
    Role role = Role::pre;
    LandmarkSet landmarks;
    std::optional<double> apparent_age;
    std::optional<std::vector<double>> embedding;

    friend bool operator==(const FaceRecord&, const FaceRecord&) = default;
};

struct SubjectPair {
    std::string subject_id;
    std::string surgeon_id;
    std::set<std::string> procedure_tags;
    FaceRecord pre;
    FaceRecord post;
};

struct Cohort {
    std::string name;
    std::vector<SubjectPair> pairs;
};

/// Parses one record document (JSON text). Normalized coordinates are scaled
/// to pixels by the declared width/height.
FaceRecord parse_face_record(std::string_view json_text);
FaceRecord read_face_record(const std::filesystem::path& path);

/// Record JSON. With the default pixel encoding,
/// parse_face_record(serialize_face_record(r)) reproduces r's coordinates bit
/// for bit; normalized encoding divides by the image size.
std::string serialize_face_record(const FaceRecord& record, CoordMode encoding = CoordMode::pixel);

struct ManifestRow {
    std::size_t line = 0;
    std::string subject_id;
    std::string surgeon_id;
    std::set<std::string> procedure_tags;
    std::string pre_record;
    std::string post_record;
};

inline constexpr std::string_view kManifestHeader =
    "subject_id,surgeon_id,procedure_tags,pre_record,post_record";

/// Parses the manifest CSV. Rejects a wrong header or wrong column count
/// (MalformedManifest) and repeated subject ids (DuplicateSubjectId).
std::vector<ManifestRow> parse_manifest(std::string_view csv_text);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);
std::string format_manifest(std::span<const ManifestRow> rows);

/// Loads both records of one manifest row and checks their roles and subject.
SubjectPair load_subject_pair(const ManifestRow& row, const std::filesystem::path& record_dir);

Cohort load_cohort(const std::filesystem::path& manifest, const std::filesystem::path& record_dir);

}  // namespace facemorph
