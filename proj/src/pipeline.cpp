#include "facemorph/pipeline.hpp"

#include "facemorph/alignment.hpp"
#include "facemorph/error.hpp"
#include "facemorph/outcome.hpp"
#include "facemorph/symmetry.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

namespace facemorph {

namespace fs = std::filesystem;

namespace {

bool is_ingest_error(ErrorCode c) {
    switch (c) {
        case ErrorCode::MissingField:
        case ErrorCode::InvalidValue:
        case ErrorCode::WrongLandmarkCount:
        case ErrorCode::OutOfRangeCoordinate:
        case ErrorCode::ZeroNormEmbedding:
        case ErrorCode::NegativeAge:
        case ErrorCode::UnsupportedSchemaVersion:
        case ErrorCode::MalformedManifest:
        case ErrorCode::DuplicateSubjectId:
        case ErrorCode::MissingRecordFile:
        case ErrorCode::RolePairingError:
            return true;
        default:
            return false;
    }
}

// Runs fn(i) for i in [0, n) across a fixed set of workers; each index is
// claimed exactly once, so results written by index stay deterministic.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    unsigned count = workers ? workers : std::max(1u, std::thread::hardware_concurrency());
    count = static_cast<unsigned>(std::min<std::size_t>(count, n));
    if (count <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

struct SubjectResult {
    std::optional<SubjectPair> pair;
    std::optional<Error> error;
    std::optional<SymmetryResult> sym_pre, sym_post;
    std::optional<NasalFeatureVector> nasal_pre, nasal_post;
    std::optional<NasalImprovement> nasal;
    std::optional<AgeDelta> age;
    std::optional<OutcomeCategory> category;
    std::optional<AlignedFace> aligned_pre, aligned_post;
};

void analyze_subject(const RunConfig& cfg, SubjectResult& r) {
    const SubjectPair& p = *r.pair;
    if (cfg.run_symmetry || cfg.run_outcomes) {
        auto pre = align_outer_eyes(p.pre.landmarks, cfg.scheme);
        auto post = align_outer_eyes(p.post.landmarks, cfg.scheme);
        r.sym_pre = symmetry_score(pre);
        r.sym_post = symmetry_score(post);
        if (cfg.write_aligned) {
            r.aligned_pre = std::move(pre);
            r.aligned_post = std::move(post);
        }
    }
    if (cfg.run_nasal) {
        r.nasal_pre = nasal_features(align_inner_eyes(p.pre.landmarks, cfg.scheme), cfg.scheme);
        r.nasal_post = nasal_features(align_inner_eyes(p.post.landmarks, cfg.scheme), cfg.scheme);
        r.nasal = improvement(*r.nasal_pre, *r.nasal_post, cfg.ideals);
    }
    if (cfg.run_outcomes) {
        r.age = age_delta(p.pre, p.post);
        r.category = categorize(symmetry_delta(*r.sym_pre, *r.sym_post).delta, r.age->delta);
    }
}

}  // namespace

ExitCode exit_code_for(const Error& e) {
    return is_ingest_error(e.code()) ? ExitCode::validation_failure : ExitCode::analysis_failure;
}

void RunConfig::validate(bool need_output) const {
    if (!(target_fmr >= 0.0 && target_fmr < 1.0))
        throw Error(ErrorCode::InvalidArgument, fmt::format("--fmr {} outside [0, 1)", target_fmr));
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("--alpha {} outside (0, 1)", alpha));
    ideals.validate();
    scheme.validate();
    if (manifest.empty() || !fs::is_regular_file(manifest))
        throw Error(ErrorCode::InvalidArgument, fmt::format("manifest '{}' does not exist", manifest.string()));
    if (!records.empty() && !fs::is_directory(records))
        throw Error(ErrorCode::InvalidArgument, fmt::format("record directory '{}' does not exist", records.string()));
    if (need_output && out.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
}

Histogram pooled_histogram(const std::vector<double>& pre, const std::vector<double>& post, std::size_t bins) {
    Histogram h;
    h.pre.assign(bins, 0);
    h.post.assign(bins, 0);
    if (pre.empty() && post.empty()) return h;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* v : {&pre, &post})
        for (double x : *v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    h.lo = lo;
    h.hi = hi;
    const double width = (hi - lo) / static_cast<double>(bins);
    auto bin_of = [&](double x) {
        const auto b = static_cast<std::size_t>(std::floor((x - lo) / width));
        return std::min(b, bins - 1);
    };
    for (double x : pre) ++h.pre[bin_of(x)];
    for (double x : post) ++h.post[bin_of(x)];
    return h;
}

void write_file_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
        f << text;
        f.flush();
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot rename {} -> {}: {}", tmp.string(), path.string(), ec.message()));
}

ValidationOutcome run_validate(const RunConfig& config, std::ostream& log) {
    ValidationOutcome out;
    std::vector<ManifestRow> rows;
    try {
        rows = read_manifest(config.manifest);
    } catch (const Error& e) {
        out.messages.push_back(fmt::format("FAIL {}: {}", config.manifest.string(), e.what()));
        log << out.messages.back() << '\n';
        out.exit = ExitCode::validation_failure;
        return out;
    }
    if (rows.empty()) {
        out.messages.push_back(fmt::format("FAIL {}: EmptyCohort: manifest lists no subjects", config.manifest.string()));
        log << out.messages.back() << '\n';
        out.exit = ExitCode::validation_failure;
        return out;
    }
    const fs::path dir = config.records.empty() ? config.manifest.parent_path() : config.records;
    for (const auto& row : rows) {
        std::optional<Role> roles[2];
        const std::string* files[2] = {&row.pre_record, &row.post_record};
        for (int k = 0; k < 2; ++k) {
            fs::path path(*files[k]);
            if (path.is_relative()) path = dir / path;
            ++out.records_checked;
            try {
                if (!fs::is_regular_file(path)) throw Error(ErrorCode::MissingRecordFile, path.string());
                const FaceRecord rec = read_face_record(path);
                if (rec.subject_id != row.subject_id)
                    throw Error(ErrorCode::RolePairingError,
                                fmt::format("record declares subject '{}', manifest row says '{}'", rec.subject_id, row.subject_id));
                roles[k] = rec.role;
                ++out.records_valid;
                spdlog::debug("valid {}", path.string());
            } catch (const Error& e) {
                out.messages.push_back(fmt::format("FAIL {}: {}", path.string(), e.what()));
                log << out.messages.back() << '\n';
            }
        }
        if (roles[0] && roles[1] && (*roles[0] != Role::pre || *roles[1] != Role::post)) {
            out.messages.push_back(fmt::format("FAIL subject {}: RolePairingError: expected pre/post, got {}/{}", row.subject_id,
                                               to_string(*roles[0]), to_string(*roles[1])));
            log << out.messages.back() << '\n';
        }
    }
    log << out.records_valid << " records valid";
    if (out.records_valid != out.records_checked) log << ", " << (out.records_checked - out.records_valid) << " invalid";
    log << '\n';
    out.exit = out.messages.empty() ? ExitCode::ok : ExitCode::validation_failure;
    return out;
}

AnalyzeOutcome run_analyze(const RunConfig& config, std::ostream& log) {
    AnalyzeOutcome outcome;
    const fs::path dir = config.records.empty() ? config.manifest.parent_path() : config.records;

    std::vector<ManifestRow> rows = read_manifest(config.manifest);
    if (config.procedure) {
        std::erase_if(rows, [&](const ManifestRow& r) { return !r.procedure_tags.contains(*config.procedure); });
        spdlog::info("{} subjects tagged '{}'", rows.size(), *config.procedure);
    }
    if (rows.empty()) throw Error(ErrorCode::EmptyCohort, "no subjects to analyze");

    std::vector<SubjectResult> results(rows.size());
    parallel_for(rows.size(), config.workers, [&](std::size_t i) {
        try {
            results[i].pair = load_subject_pair(rows[i], dir);
            analyze_subject(config, results[i]);
        } catch (const Error& e) {
            results[i].error = e;
        }
    });

    Cohort cohort;
    cohort.name = config.manifest.stem().string();
    std::vector<const SubjectResult*> ok;
    std::vector<SubjectFailure> failures;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].error) {
            const Error& e = *results[i].error;
            if (!config.keep_going) throw Error(e.code(), fmt::format("subject '{}': {}", rows[i].subject_id, e.what()));
            spdlog::warn("skipping subject {}: {}", rows[i].subject_id, e.what());
            failures.push_back({rows[i].subject_id, e.what()});
            continue;
        }
        ok.push_back(&results[i]);
        cohort.pairs.push_back(*results[i].pair);
    }
    if (cohort.pairs.empty()) throw Error(ErrorCode::EmptyCohort, "every subject failed");

    AggregateInputs inputs;
    if (config.run_nasal) {
        inputs.nasal.emplace();
        for (const auto* r : ok) inputs.nasal->emplace(r->pair->subject_id, *r->nasal);
    }
    if (config.run_outcomes) {
        inputs.outcomes.emplace();
        for (const auto* r : ok) inputs.outcomes->emplace(r->pair->subject_id, *r->category);
    }
    std::vector<RocPoint> curve;
    std::optional<OperatingPoint> op;
    if (config.run_biometric) {
        try {
            inputs.scores = build_scores(cohort, config.imposter_mode);
            curve = roc(*inputs.scores);
            op = tmr_at_fmr(*inputs.scores, config.target_fmr);
        } catch (const Error& e) {
            if (!config.keep_going) throw;
            spdlog::warn("biometric evaluation skipped: {}", e.what());
            failures.push_back({"<biometric>", e.what()});
            inputs.scores.reset();
        }
    }

    AggregateOptions opts{.alpha = config.alpha, .target_fmr = config.target_fmr, .ideals = config.ideals};
    outcome.report = aggregate(cohort, inputs, opts);
    outcome.report.failures = failures;

    std::error_code ec;
    fs::create_directories(config.out, ec);
    if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", config.out.string(), ec.message()));

    write_file_atomic(config.out / "report.json", report_json(outcome.report));
    write_file_atomic(config.out / "features.csv", feature_rows_csv(outcome.report));
    write_file_atomic(config.out / "non_improved.csv", non_improved_csv(outcome.report, cohort));

    if (config.run_symmetry || config.run_outcomes) {
        std::string csv = symmetry_csv_header() + "\n";
        for (const auto* r : ok) {
            csv += symmetry_csv_row(r->pair->pre.image_id, *r->sym_pre) + "\n";
            csv += symmetry_csv_row(r->pair->post.image_id, *r->sym_post) + "\n";
        }
        write_file_atomic(config.out / "symmetry.csv", csv);
    }
    if (config.run_nasal) {
        std::string csv = nasal_csv_header() + "\n";
        for (const auto* r : ok) csv += nasal_csv_row(r->pair->subject_id, *r->nasal_pre, *r->nasal_post, *r->nasal) + "\n";
        write_file_atomic(config.out / "nasal.csv", csv);

        std::string hist = "feature,bin,bin_lo,bin_hi,pre_count,post_count\n";
        for (auto f : {NasalFeature::aw_ic, NasalFeature::aw_fw, NasalFeature::nl_fh}) {
            std::vector<double> pre, post;
            for (const auto* r : ok) {
                pre.push_back((*r->nasal_pre)[f]);
                post.push_back((*r->nasal_post)[f]);
            }
            const Histogram h = pooled_histogram(pre, post);
            const double width = (h.hi - h.lo) / static_cast<double>(kHistogramBins);
            for (std::size_t b = 0; b < kHistogramBins; ++b)
                hist += fmt::format("{},{},{:.17g},{:.17g},{},{}\n", to_string(f), b, h.lo + width * static_cast<double>(b),
                                    b + 1 == kHistogramBins ? h.hi : h.lo + width * static_cast<double>(b + 1), h.pre[b],
                                    h.post[b]);
        }
        write_file_atomic(config.out / "histograms.csv", hist);
    }
    if (config.run_outcomes) {
        std::string csv = outcome_csv_header() + "\n";
        for (const auto* r : ok)
            csv += outcome_csv_row(r->pair->subject_id, r->pair->surgeon_id,
                                   symmetry_delta(*r->sym_pre, *r->sym_post).delta, r->age->delta, *r->category) +
                   "\n";
        write_file_atomic(config.out / "outcomes.csv", csv);
    }
    if (op) {
        write_file_atomic(config.out / "roc.csv", roc_csv(curve));
        write_file_atomic(config.out / "biometric.json", operating_point_json(*op) + "\n");
    }
    if (config.write_aligned) {
        fs::create_directories(config.out / "aligned", ec);
        for (const auto* r : ok) {
            if (!r->aligned_pre) continue;
            const auto& p = *r->pair;
            write_file_atomic(config.out / "aligned" / (p.pre.image_id + ".json"),
                              aligned_record_json(*r->aligned_pre, p.pre.image_id, p.subject_id, Role::pre) + "\n");
            write_file_atomic(config.out / "aligned" / (p.post.image_id + ".json"),
                              aligned_record_json(*r->aligned_post, p.post.image_id, p.subject_id, Role::post) + "\n");
        }
    }

    log << fmt::format("analyzed {} subjects ({} failed); report written to {}\n", cohort.pairs.size(), failures.size(),
                       (config.out / "report.json").string());
    outcome.exit = ExitCode::ok;
    return outcome;
}

SynthCohort run_synth(const SynthSpec& spec, const fs::path& out) {
    SynthCohort synth = generate(spec);
    write_fixture(synth, spec, out);
    return synth;
}

}  // namespace facemorph
