#pragma once

#include "facemorph/error.hpp"
#include "facemorph/geometry.hpp"
#include "facemorph/landmarks.hpp"
#include "facemorph/synth.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <numbers>
#include <optional>
#include <vector>

namespace testutil {

using facemorph::Point2;

inline Point2 rotate_about(Point2 p, Point2 c, double radians) {
    const double cs = std::cos(radians), sn = std::sin(radians);
    const Point2 d = p - c;
    return {cs * d.x - sn * d.y + c.x, sn * d.x + cs * d.y + c.y};
}

inline std::vector<Point2> transform(const std::vector<Point2>& pts, double scale, double degrees, Point2 shift) {
    std::vector<Point2> out;
    const double rad = degrees * std::numbers::pi / 180.0;
    for (const auto& p : pts) {
        const Point2 r = rotate_about(p, {256.0, 256.0}, rad);
        out.push_back({r.x * scale + shift.x, r.y * scale + shift.y});
    }
    return out;
}

/// Template face with Gaussian jitter on every point, so nothing sits exactly on the midline.
inline std::vector<Point2> random_face(facemorph::SplitMix64& rng, double sigma = 2.0) {
    auto pts = facemorph::symmetric_template();
    for (auto& p : pts) {
        p.x += sigma * rng.normal();
        p.y += sigma * rng.normal();
    }
    return pts;
}

inline facemorph::LandmarkSet as_landmarks(std::vector<Point2> pts, double size = 4096.0) {
    return facemorph::LandmarkSet(std::move(pts), size, size);
}

/// Code of the facemorph::Error thrown by `f`, or nullopt if it returns normally.
template <typename F>
std::optional<facemorph::ErrorCode> error_code(F&& f) {
    try {
        f();
    } catch (const facemorph::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline facemorph::SubjectPair make_pair(const std::string& sid, const std::string& surgeon,
                                        std::optional<std::vector<double>> pre_emb = std::nullopt,
                                        std::optional<std::vector<double>> post_emb = std::nullopt,
                                        std::optional<double> pre_age = 40.0, std::optional<double> post_age = 39.0) {
    const facemorph::LandmarkSet lm(facemorph::symmetric_template(), 512.0, 512.0);
    return facemorph::SubjectPair{sid,
                                  surgeon,
                                  {"rhinoplasty"},
                                  {sid + "_pre", sid, facemorph::Role::pre, lm, pre_age, std::move(pre_emb)},
                                  {sid + "_post", sid, facemorph::Role::post, lm, post_age, std::move(post_emb)}};
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("facemorph_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testutil
