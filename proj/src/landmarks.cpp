#include "facemorph/landmarks.hpp"

#include "facemorph/error.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace facemorph {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path, ErrorCode missing_code) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(missing_code, path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string where(std::string_view image_id, std::string_view field) {
    std::string out = "field '";
    out += field;
    out += "' of image '";
    out += image_id.empty() ? std::string_view("<unknown>") : image_id;
    out += "'";
    return out;
}

const json& require(const json& doc, const char* field, std::string_view image_id) {
    auto it = doc.find(field);
    if (it == doc.end()) throw Error(ErrorCode::MissingField, where(image_id, field));
    return *it;
}

double require_finite(const json& value, std::string_view field, std::string_view image_id) {
    if (!value.is_number()) throw Error(ErrorCode::InvalidValue, where(image_id, field) + " is not a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, where(image_id, field) + " is not finite");
    return v;
}

std::string require_string(const json& doc, const char* field, std::string_view image_id) {
    const json& v = require(doc, field, image_id);
    if (!v.is_string()) throw Error(ErrorCode::InvalidValue, where(image_id, field) + " is not a string");
    return v.get<std::string>();
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

void LandmarkScheme::validate() const {
    const std::array<std::size_t, 14> all{outer_eye_l, outer_eye_r, nose_tip,  nostril_l, nostril_r,
                                          inner_eye_l, inner_eye_r, cheek_l,   cheek_r,   chin,
                                          forehead,    glabella,    nose_length_top, nose_length_bottom};
    for (auto idx : all) {
        if (idx >= kLandmarkCount)
            throw Error(ErrorCode::InvalidArgument, "landmark index " + std::to_string(idx) + " out of range");
    }
    if (outer_eye_l == outer_eye_r || nostril_l == nostril_r || inner_eye_l == inner_eye_r || cheek_l == cheek_r)
        throw Error(ErrorCode::InvalidArgument, "left/right landmark indices must differ");
    if (nose_length_top == nose_length_bottom)
        throw Error(ErrorCode::InvalidArgument, "nose-length endpoints must differ");
}

std::string_view to_string(CoordMode mode) noexcept {
    return mode == CoordMode::pixel ? "pixel" : "normalized";
}

std::string_view to_string(Role role) noexcept { return role == Role::pre ? "pre" : "post"; }

LandmarkSet::LandmarkSet(std::vector<Point2> points, double image_width, double image_height,
                         CoordMode source_mode)
    : points_(std::move(points)), width_(image_width), height_(image_height), mode_(source_mode) {
    if (points_.size() != kLandmarkCount)
        throw Error(ErrorCode::WrongLandmarkCount,
                    "expected " + std::to_string(kLandmarkCount) + " landmarks, got " + std::to_string(points_.size()));
    if (!(std::isfinite(width_) && width_ > 0.0) || !(std::isfinite(height_) && height_ > 0.0))
        throw Error(ErrorCode::InvalidValue, "image dimensions must be positive");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const Point2 p = points_[i];
        if (!(p.x >= 0.0 && p.x <= width_ && p.y >= 0.0 && p.y <= height_))
            throw Error(ErrorCode::OutOfRangeCoordinate, "landmark " + std::to_string(i) + " outside image bounds");
    }
}

FaceRecord parse_face_record(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidValue, std::string("record is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::InvalidValue, "record must be a JSON object");

    const std::string image_id = require_string(doc, "image_id", "");

    if (auto it = doc.find("schema_version"); it != doc.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<long long>() != kRecordSchemaVersion)
            throw Error(ErrorCode::UnsupportedSchemaVersion, where(image_id, "schema_version"));
    }

    FaceRecord rec{.image_id = image_id,
                   .subject_id = require_string(doc, "subject_id", image_id),
                   .role = Role::pre,
                   .landmarks = LandmarkSet(std::vector<Point2>(kLandmarkCount), 1.0, 1.0),
                   .apparent_age = std::nullopt,
                   .embedding = std::nullopt};

    const std::string role = require_string(doc, "role", image_id);
    if (role == "pre") rec.role = Role::pre;
    else if (role == "post") rec.role = Role::post;
    else throw Error(ErrorCode::InvalidValue, where(image_id, "role") + " must be 'pre' or 'post'");

    const double width = require_finite(require(doc, "width", image_id), "width", image_id);
    const double height = require_finite(require(doc, "height", image_id), "height", image_id);
    if (width <= 0.0 || height <= 0.0)
        throw Error(ErrorCode::InvalidValue, where(image_id, "width/height") + " must be positive");

    const std::string mode_text = require_string(doc, "coord_mode", image_id);
    CoordMode mode;
    if (mode_text == "pixel") mode = CoordMode::pixel;
    else if (mode_text == "normalized") mode = CoordMode::normalized;
    else throw Error(ErrorCode::InvalidValue, where(image_id, "coord_mode") + " must be 'pixel' or 'normalized'");

    const json& lm = require(doc, "landmarks", image_id);
    if (!lm.is_array()) throw Error(ErrorCode::InvalidValue, where(image_id, "landmarks") + " is not an array");
    if (lm.size() != kLandmarkCount)
        throw Error(ErrorCode::WrongLandmarkCount, where(image_id, "landmarks") + " has " + std::to_string(lm.size()) +
                                                       " entries, expected " + std::to_string(kLandmarkCount));
    std::vector<Point2> points;
    points.reserve(kLandmarkCount);
    for (std::size_t i = 0; i < lm.size(); ++i) {
        const json& p = lm[i];
        const std::string field = "landmarks[" + std::to_string(i) + "]";
        if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::InvalidValue, where(image_id, field) + " is not [x, y]");
        double x = require_finite(p[0], field, image_id);
        double y = require_finite(p[1], field, image_id);
        if (mode == CoordMode::normalized) {
            if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
                throw Error(ErrorCode::OutOfRangeCoordinate, where(image_id, field) + " outside [0, 1]");
            x *= width;
            y *= height;
        } else if (x < 0.0 || x > width || y < 0.0 || y > height) {
            throw Error(ErrorCode::OutOfRangeCoordinate, where(image_id, field) + " outside image bounds");
        }
        points.push_back({x, y});
    }
    rec.landmarks = LandmarkSet(std::move(points), width, height, mode);

    if (auto it = doc.find("apparent_age"); it != doc.end() && !it->is_null()) {
        const double age = require_finite(*it, "apparent_age", image_id);
        if (age < 0.0) throw Error(ErrorCode::NegativeAge, where(image_id, "apparent_age"));
        rec.apparent_age = age;
    }

    if (auto it = doc.find("embedding"); it != doc.end() && !it->is_null()) {
        if (!it->is_array() || it->empty())
            throw Error(ErrorCode::InvalidValue, where(image_id, "embedding") + " must be a nonempty array");
        std::vector<double> emb;
        emb.reserve(it->size());
        double norm2 = 0.0;
        for (const json& v : *it) {
            const double e = require_finite(v, "embedding", image_id);
            norm2 += e * e;
            emb.push_back(e);
        }
        if (!(norm2 > 0.0)) throw Error(ErrorCode::ZeroNormEmbedding, where(image_id, "embedding"));
        rec.embedding = std::move(emb);
    }
    return rec;
}

FaceRecord read_face_record(const std::filesystem::path& path) {
    return parse_face_record(read_text(path, ErrorCode::MissingRecordFile));
}

std::string serialize_face_record(const FaceRecord& record, CoordMode encoding) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kRecordSchemaVersion;
    doc["image_id"] = record.image_id;
    doc["subject_id"] = record.subject_id;
    doc["role"] = to_string(record.role);
    auto dimension = [](double v) {
        return v == std::trunc(v) ? nlohmann::ordered_json(static_cast<std::int64_t>(v)) : nlohmann::ordered_json(v);
    };
    doc["width"] = dimension(record.landmarks.image_width());
    doc["height"] = dimension(record.landmarks.image_height());
    doc["coord_mode"] = to_string(encoding);
    const double sx = encoding == CoordMode::normalized ? record.landmarks.image_width() : 1.0;
    const double sy = encoding == CoordMode::normalized ? record.landmarks.image_height() : 1.0;
    auto lm = nlohmann::ordered_json::array();
    for (const Point2& p : record.landmarks.points()) lm.push_back({p.x / sx, p.y / sy});
    doc["landmarks"] = std::move(lm);
    doc["apparent_age"] = record.apparent_age ? nlohmann::ordered_json(*record.apparent_age) : nullptr;
    doc["embedding"] = record.embedding ? nlohmann::ordered_json(*record.embedding) : nullptr;
    return doc.dump();
}

std::vector<ManifestRow> parse_manifest(std::string_view csv_text) {
    std::vector<ManifestRow> rows;
    std::set<std::string> seen;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= csv_text.size()) {
        const auto end = csv_text.find('\n', start);
        const std::string line = trim(csv_text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        ++line_no;
        start = end == std::string_view::npos ? csv_text.size() + 1 : end + 1;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kManifestHeader)
                throw Error(ErrorCode::MalformedManifest, "header must be '" + std::string(kManifestHeader) + "'");
            header_seen = true;
            continue;
        }
        auto cols = split(line, ',');
        if (cols.size() != 5)
            throw Error(ErrorCode::MalformedManifest, "line " + std::to_string(line_no) + " has " +
                                                          std::to_string(cols.size()) + " columns, expected 5");
        ManifestRow row{.line = line_no,
                        .subject_id = cols[0],
                        .surgeon_id = cols[1],
                        .procedure_tags = {},
                        .pre_record = cols[3],
                        .post_record = cols[4]};
        if (row.subject_id.empty() || row.pre_record.empty() || row.post_record.empty())
            throw Error(ErrorCode::MalformedManifest, "line " + std::to_string(line_no) + " has an empty required column");
        for (auto& tag : split(cols[2], ';'))
            if (!tag.empty()) row.procedure_tags.insert(tag);
        if (!seen.insert(row.subject_id).second) throw Error(ErrorCode::DuplicateSubjectId, row.subject_id);
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw Error(ErrorCode::MalformedManifest, "manifest is empty (no header)");
    return rows;
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_text(path, ErrorCode::IoError));
}

std::string format_manifest(std::span<const ManifestRow> rows) {
    std::string out(kManifestHeader);
    out += '\n';
    for (const auto& row : rows) {
        std::string tags;
        for (const auto& t : row.procedure_tags) {
            if (!tags.empty()) tags += ';';
            tags += t;
        }
        out += row.subject_id + ',' + row.surgeon_id + ',' + tags + ',' + row.pre_record + ',' + row.post_record + '\n';
    }
    return out;
}

SubjectPair load_subject_pair(const ManifestRow& row, const std::filesystem::path& record_dir) {
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() ? record_dir / path : path;
    };
    const auto pre_path = resolve(row.pre_record);
    const auto post_path = resolve(row.post_record);
    if (!std::filesystem::is_regular_file(pre_path)) throw Error(ErrorCode::MissingRecordFile, pre_path.string());
    if (!std::filesystem::is_regular_file(post_path)) throw Error(ErrorCode::MissingRecordFile, post_path.string());

    FaceRecord pre = read_face_record(pre_path);
    FaceRecord post = read_face_record(post_path);
    if (pre.role != Role::pre || post.role != Role::post)
        throw Error(ErrorCode::RolePairingError, "subject '" + row.subject_id + "' needs one pre and one post record, got " +
                                                     std::string(to_string(pre.role)) + "/" +
                                                     std::string(to_string(post.role)));
    if (pre.subject_id != row.subject_id || post.subject_id != row.subject_id)
        throw Error(ErrorCode::RolePairingError, "records for subject '" + row.subject_id +
                                                     "' declare subject ids '" + pre.subject_id + "'/'" +
                                                     post.subject_id + "'");
    return SubjectPair{.subject_id = row.subject_id,
                       .surgeon_id = row.surgeon_id,
                       .procedure_tags = row.procedure_tags,
                       .pre = std::move(pre),
                       .post = std::move(post)};
}

Cohort load_cohort(const std::filesystem::path& manifest, const std::filesystem::path& record_dir) {
    Cohort cohort;
    cohort.name = manifest.stem().string();
    for (const auto& row : read_manifest(manifest)) cohort.pairs.push_back(load_subject_pair(row, record_dir));
    return cohort;
}

}  // namespace facemorph
