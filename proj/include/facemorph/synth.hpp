#pragma once

#include "facemorph/geometry.hpp"
#include "facemorph/landmarks.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace facemorph {

/// SplitMix64 (Steele, Lea & Flood 2014). Seeded with 1234567 the first output
/// is 6457827717110365317.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Box-Muller, one variate per call.
    double normal() noexcept;
    std::size_t below(std::size_t bound) noexcept { return static_cast<std::size_t>(next() % bound); }

private:
    std::uint64_t state_;
};

struct SynthSpec {
    std::uint64_t seed = 42;
    std::size_t n_subjects = 366;
    double asymmetry_noise_px = 1.0;  // one-sided jitter on right-side landmarks (template px)
    // aw_ic, aw_fw, nl_fh
    std::array<double, 3> planted_improve_probs{0.393, 0.770, 0.415};
    double symmetry_improve_prob = 0.5;
    double age_shift_mean = -1.0;
    double age_shift_sigma = 3.0;
    std::size_t embedding_dim = 128;
    double genuine_noise = 0.05;
    // Jitter on the nasal reference landmarks, as a fraction of the smallest
    // planted landmark displacement of each subject.
    double nasal_noise_fraction = 0.0;
    std::size_t n_surgeons = 3;
    double rhinoplasty_fraction = 1.0;

    /// Throws InvalidArgument (or EmptyCohort for n_subjects == 0).
    void validate() const;
};

struct SubjectTruth {
    std::string subject_id;
    std::string surgeon_id;
    std::array<bool, 3> nasal_improved{};  // aw_ic, aw_fw, nl_fh
    int delta_s_sign = 0;                  // -1 more symmetric, +1 less, 0 unchanged
    double delta_age = 0.0;
    double min_effect_px = 0.0;            // smallest planted nasal landmark displacement
    bool rhinoplasty = true;
};

struct GroundTruth {
    std::vector<SubjectTruth> subjects;
    std::array<std::size_t, 3> planted_counts{};
};

struct SynthCohort {
    Cohort cohort;
    GroundTruth truth;
    std::vector<ManifestRow> manifest;  // record paths relative to the fixture root
};

inline constexpr double kSynthImageSize = 1024.0;

/// Mirror-symmetric 468-point template about x = 256 on a 512 canvas, all
/// coordinates on a 1/1024 grid.
std::vector<Point2> symmetric_template();

/// Deterministic for a fixed spec: planted flags use exact counts
/// round(p * n) assigned to a seeded random subset of subjects.
SynthCohort generate(const SynthSpec& spec);

std::string ground_truth_json(const SynthCohort& synth, const SynthSpec& spec);

/// Writes `manifest.csv`, `records/*.json`, and `ground_truth.json` under `root`.
void write_fixture(const SynthCohort& synth, const SynthSpec& spec, const std::filesystem::path& root);

}  // namespace facemorph
