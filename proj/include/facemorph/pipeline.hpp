#pragma once

#include "facemorph/biometric.hpp"
#include "facemorph/cohort_report.hpp"
#include "facemorph/landmarks.hpp"
#include "facemorph/nasal.hpp"
#include "facemorph/synth.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace facemorph {

enum class ExitCode : int { ok = 0, validation_failure = 1, analysis_failure = 2, config_error = 3 };

class Error;
/// Record and manifest problems map to validation_failure, the rest to analysis_failure.
ExitCode exit_code_for(const Error& e);

struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path records;
    std::filesystem::path out;
    std::optional<std::string> procedure;
    IdealProfile ideals;
    double alpha = 0.001;
    double target_fmr = 1e-4;
    LandmarkScheme scheme;
    bool run_symmetry = true;
    bool run_nasal = true;
    bool run_outcomes = true;
    bool run_biometric = true;
    ImposterMode imposter_mode = ImposterMode::pre_vs_post;
    bool keep_going = false;
    bool write_aligned = false;
    unsigned workers = 0;  // 0 = hardware concurrency

    /// Throws InvalidArgument for out-of-range values or missing input paths.
    void validate(bool need_output) const;
};

/// Equal-width bins over the pooled pre+post range.
struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> pre;
    std::vector<std::size_t> post;
};

inline constexpr std::size_t kHistogramBins = 30;

Histogram pooled_histogram(const std::vector<double>& pre, const std::vector<double>& post,
                           std::size_t bins = kHistogramBins);

struct ValidationOutcome {
    std::size_t records_valid = 0;
    std::size_t records_checked = 0;
    std::vector<std::string> messages;  // one line per failure
    ExitCode exit = ExitCode::ok;
};

/// Checks every record named by the manifest, continuing past failures.
ValidationOutcome run_validate(const RunConfig& config, std::ostream& log);

struct AnalyzeOutcome {
    CohortReport report;
    ExitCode exit = ExitCode::ok;
};

/// Full pipeline. Writes report.json, features.csv, non_improved.csv,
/// symmetry.csv, nasal.csv, outcomes.csv, roc.csv, biometric.json and
/// histograms.csv into `config.out` (each written atomically).
AnalyzeOutcome run_analyze(const RunConfig& config, std::ostream& log);

/// Generates a fixture cohort and writes it under `out`.
SynthCohort run_synth(const SynthSpec& spec, const std::filesystem::path& out);

/// Write to a sibling temp file then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace facemorph
