#include "facemorph/biometric.hpp"

#include "facemorph/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace facemorph {

namespace {

void require_scores(const ScoreSet& s) {
    if (s.imposter.empty()) throw Error(ErrorCode::EmptyImposterSet, "no imposter comparisons");
    if (s.genuine.empty()) throw Error(ErrorCode::EmptyGenuineSet, "no genuine comparisons");
    for (double v : s.genuine)
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite genuine score");
    for (double v : s.imposter)
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite imposter score");
}

// Count of entries >= t in an ascending-sorted vector.
std::size_t count_at_least(const std::vector<double>& sorted, double t) {
    return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

double fraction(std::size_t k, std::size_t n) { return static_cast<double>(k) / static_cast<double>(n); }

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch, fmt::format("embedding sizes {} and {}", a.size(), b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorCode::ZeroNorm, "cosine similarity of a zero vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

ScoreSet ScoreSet::restrict_to(std::span<const std::size_t> keep) const {
    auto in = [&](std::size_t i) { return std::binary_search(keep.begin(), keep.end(), i); };
    ScoreSet out;
    for (std::size_t k = 0; k < genuine.size() && k < genuine_subject.size(); ++k) {
        if (in(genuine_subject[k])) {
            out.genuine.push_back(genuine[k]);
            out.genuine_subject.push_back(genuine_subject[k]);
        }
    }
    for (std::size_t k = 0; k < imposter.size() && k < imposter_subjects.size(); ++k) {
        const auto [i, j] = imposter_subjects[k];
        if (in(i) && in(j)) {
            out.imposter.push_back(imposter[k]);
            out.imposter_subjects.push_back(imposter_subjects[k]);
        }
    }
    return out;
}

ScoreSet build_scores(const Cohort& cohort, ImposterMode mode) {
    const auto& pairs = cohort.pairs;
    for (const auto& p : pairs) {
        if (!p.pre.embedding || !p.post.embedding) throw Error(ErrorCode::MissingEmbedding, p.subject_id);
    }
    ScoreSet s;
    const std::size_t n = pairs.size();
    for (std::size_t i = 0; i < n; ++i) {
        s.genuine.push_back(cosine_similarity(*pairs[i].pre.embedding, *pairs[i].post.embedding));
        s.genuine_subject.push_back(i);
    }
    auto add = [&](const std::vector<double>& a, const std::vector<double>& b, std::size_t i, std::size_t j) {
        s.imposter.push_back(cosine_similarity(a, b));
        s.imposter_subjects.emplace_back(i, j);
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) add(*pairs[i].pre.embedding, *pairs[j].post.embedding, i, j);
    if (mode == ImposterMode::all_cross) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                add(*pairs[i].pre.embedding, *pairs[j].pre.embedding, i, j);
                add(*pairs[i].post.embedding, *pairs[j].post.embedding, i, j);
            }
    }
    return s;
}

OperatingPoint tmr_at_fmr(const ScoreSet& scores, double target_fmr) {
    if (!(target_fmr >= 0.0 && target_fmr < 1.0))
        throw Error(ErrorCode::InvalidArgument, fmt::format("target FMR {} outside [0, 1)", target_fmr));
    require_scores(scores);

    std::vector<double> gen = scores.genuine;
    std::vector<double> imp = scores.imposter;
    std::sort(gen.begin(), gen.end());
    std::sort(imp.begin(), imp.end());

    std::vector<double> candidates;
    candidates.reserve(gen.size() + imp.size() + 1);
    std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(), std::back_inserter(candidates));
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    candidates.push_back(std::numeric_limits<double>::infinity());

    // FMR is non-increasing in t, so the admissible thresholds form a suffix.
    const auto m = imp.size();
    const auto it = std::partition_point(candidates.begin(), candidates.end(), [&](double t) {
        return fraction(count_at_least(imp, t), m) > target_fmr;
    });
    const double t = *it;

    OperatingPoint op;
    op.target_fmr = target_fmr;
    op.threshold = t;
    op.imposter_accepted = count_at_least(imp, t);
    op.genuine_accepted = count_at_least(gen, t);
    op.n_genuine = gen.size();
    op.n_imposter = m;
    op.fmr = fraction(op.imposter_accepted, m);
    op.tmr = fraction(op.genuine_accepted, gen.size());
    op.degenerate_fmr = static_cast<double>(m) * target_fmr < 1.0;
    return op;
}

std::vector<RocPoint> roc(const ScoreSet& scores) {
    require_scores(scores);
    std::vector<double> gen = scores.genuine;
    std::vector<double> imp = scores.imposter;
    std::sort(gen.begin(), gen.end());
    std::sort(imp.begin(), imp.end());

    std::vector<double> thresholds;
    std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.push_back(std::numeric_limits<double>::infinity());
    std::reverse(thresholds.begin(), thresholds.end());

    std::vector<RocPoint> curve;
    curve.reserve(thresholds.size());
    for (double t : thresholds) {
        RocPoint p;
        p.threshold = t;
        p.imposter_accepted = count_at_least(imp, t);
        p.genuine_accepted = count_at_least(gen, t);
        p.fmr = fraction(p.imposter_accepted, imp.size());
        p.tmr = fraction(p.genuine_accepted, gen.size());
        curve.push_back(p);
    }
    return curve;
}

std::string roc_csv(std::span<const RocPoint> curve) {
    std::string out = "threshold,fmr,tmr\n";
    for (const auto& p : curve) {
        if (std::isinf(p.threshold)) out += fmt::format("inf,{:.17g},{:.17g}\n", p.fmr, p.tmr);
        else out += fmt::format("{:.17g},{:.17g},{:.17g}\n", p.threshold, p.fmr, p.tmr);
    }
    return out;
}

std::string operating_point_json(const OperatingPoint& op) {
    nlohmann::ordered_json j;
    j["tmr"] = op.tmr;
    j["fmr_target"] = op.target_fmr;
    j["threshold"] = std::isfinite(op.threshold) ? nlohmann::ordered_json(op.threshold) : nlohmann::ordered_json(nullptr);
    j["n_genuine"] = op.n_genuine;
    j["n_imposter"] = op.n_imposter;
    j["degenerate_fmr"] = op.degenerate_fmr;
    return j.dump(2);
}

}  // namespace facemorph
