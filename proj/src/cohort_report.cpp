#include "facemorph/cohort_report.hpp"

#include "facemorph/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>

namespace facemorph {

using ojson = nlohmann::ordered_json;

namespace {

template <typename Map>
void check_coverage(const Cohort& cohort, const Map& results, std::string_view what) {
    for (const auto& p : cohort.pairs)
        if (!results.contains(p.subject_id))
            throw Error(ErrorCode::InconsistentCoverage, fmt::format("subject '{}' has no {} result", p.subject_id, what));
}

double fraction(std::size_t k, std::size_t n) { return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n); }

NasalSummary summarize_nasal(const std::vector<const NasalImprovement*>& subjects, const std::vector<std::string>& ids,
                             double alpha) {
    NasalSummary s;
    const std::size_t n = subjects.size();
    for (auto f : kAllNasalFeatures) {
        FeatureGroupResult& r = s.per_feature[static_cast<std::size_t>(f)];
        r.feature = f;
        r.n = n;
        std::vector<double> before, after;
        before.reserve(n);
        after.reserve(n);
        for (const auto* imp : subjects) {
            const auto& c = (*imp)[f];
            if (c.improved) ++r.improved_count;
            before.push_back(c.deviation_before);
            after.push_back(c.deviation_after);
        }
        r.improved_rate = fraction(r.improved_count, n);
        try {
            r.wilcoxon = wilcoxon_signed_rank(before, after);
        } catch (const Error& e) {
            r.wilcoxon_error = std::string(to_string(e.code()));
        }
        try {
            r.t_test = paired_t_test(before, after);
        } catch (const Error& e) {
            r.t_test_error = std::string(to_string(e.code()));
        }
        r.significant = r.wilcoxon && r.wilcoxon->p_value < alpha;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int k = subjects[i]->significant_improved_count;
        ++s.count_counts[static_cast<std::size_t>(k)];
        if (subjects[i]->improved_any) ++s.improved_any;
        else s.non_improved.push_back(ids[i]);
    }
    for (std::size_t k = 0; k < s.count_counts.size(); ++k) s.count_distribution[k] = fraction(s.count_counts[k], n);
    s.improved_any_rate = fraction(s.improved_any, n);
    return s;
}

GroupSummary summarize(const Cohort& cohort, const std::vector<std::size_t>& members, const AggregateInputs& in,
                       const AggregateOptions& opt) {
    GroupSummary g;
    g.n_subjects = members.size();
    std::vector<std::string> ids;
    for (auto i : members) ids.push_back(cohort.pairs[i].subject_id);

    if (in.nasal) {
        std::vector<const NasalImprovement*> subjects;
        for (const auto& id : ids) subjects.push_back(&in.nasal->at(id));
        g.nasal = summarize_nasal(subjects, ids, opt.alpha);
    }
    if (in.outcomes) {
        OutcomeSummary o;
        for (const auto& id : ids) ++o.counts[static_cast<std::size_t>(in.outcomes->at(id))];
        for (std::size_t c = 0; c < 4; ++c) o.distribution[c] = fraction(o.counts[c], members.size());
        g.outcomes = o;
    }
    if (in.scores) {
        BiometricSummary b;
        try {
            b.operating_point = tmr_at_fmr(in.scores->restrict_to(members), opt.target_fmr);
        } catch (const Error& e) {
            b.error = std::string(to_string(e.code()));
        }
        g.biometric = b;
    }
    return g;
}

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson summary_json(const GroupSummary& g) {
    ojson j;
    j["n_subjects"] = g.n_subjects;
    if (g.nasal) {
        ojson nasal;
        auto rows = ojson::array();
        for (const auto& r : g.nasal->per_feature) {
            ojson row;
            row["feature"] = to_string(r.feature);
            row["n"] = r.n;
            row["improved_count"] = r.improved_count;
            row["improved_rate"] = r.improved_rate;
            row["wilcoxon_p"] = optional_number(r.wilcoxon ? std::optional(r.wilcoxon->p_value) : std::nullopt);
            row["wilcoxon_w_plus"] = optional_number(r.wilcoxon ? std::optional(r.wilcoxon->w_plus) : std::nullopt);
            row["wilcoxon_exact"] = r.wilcoxon ? ojson(r.wilcoxon->exact) : ojson(nullptr);
            row["wilcoxon_zero_dropped"] = r.wilcoxon ? ojson(r.wilcoxon->n_dropped) : ojson(nullptr);
            row["wilcoxon_error"] = r.wilcoxon_error.empty() ? ojson(nullptr) : ojson(r.wilcoxon_error);
            row["t_test_p"] = optional_number(r.t_test ? std::optional(r.t_test->p_value) : std::nullopt);
            row["t_test_error"] = r.t_test_error.empty() ? ojson(nullptr) : ojson(r.t_test_error);
            row["significant"] = r.significant;
            rows.push_back(std::move(row));
        }
        nasal["per_feature"] = std::move(rows);
        nasal["count_counts"] = g.nasal->count_counts;
        nasal["count_distribution"] = g.nasal->count_distribution;
        nasal["improved_any"] = g.nasal->improved_any;
        nasal["improved_any_rate"] = g.nasal->improved_any_rate;
        nasal["non_improved"] = g.nasal->non_improved;
        j["nasal"] = std::move(nasal);
    } else {
        j["nasal"] = nullptr;
    }
    if (g.outcomes) {
        ojson counts, dist;
        for (auto c : kAllOutcomeCategories) {
            counts[std::string(to_string(c))] = g.outcomes->counts[static_cast<std::size_t>(c)];
            dist[std::string(to_string(c))] = g.outcomes->distribution[static_cast<std::size_t>(c)];
        }
        j["outcomes"] = {{"counts", counts}, {"distribution", dist}};
    } else {
        j["outcomes"] = nullptr;
    }
    if (g.biometric) {
        ojson b;
        if (const auto& op = g.biometric->operating_point) {
            b["tmr"] = op->tmr;
            b["fmr_target"] = op->target_fmr;
            b["fmr_achieved"] = op->fmr;
            b["threshold"] = std::isfinite(op->threshold) ? ojson(op->threshold) : ojson(nullptr);
            b["n_genuine"] = op->n_genuine;
            b["n_imposter"] = op->n_imposter;
            b["degenerate_fmr"] = op->degenerate_fmr;
        } else {
            b["error"] = g.biometric->error;
        }
        j["biometric"] = std::move(b);
    } else {
        j["biometric"] = nullptr;
    }
    return j;
}

}  // namespace

CohortReport aggregate(const Cohort& cohort, const AggregateInputs& inputs, const AggregateOptions& options) {
    if (cohort.pairs.empty()) throw Error(ErrorCode::EmptyCohort, "cohort '" + cohort.name + "' has no subjects");
    if (inputs.nasal) check_coverage(cohort, *inputs.nasal, "nasal");
    if (inputs.outcomes) check_coverage(cohort, *inputs.outcomes, "outcome");
    if (inputs.scores && inputs.scores->genuine_subject.size() != cohort.pairs.size())
        throw Error(ErrorCode::InconsistentCoverage, "score set does not cover every subject");

    CohortReport report;
    report.cohort = cohort.name;
    report.alpha = options.alpha;
    report.ideals = options.ideals;

    std::vector<std::size_t> all(cohort.pairs.size());
    std::map<std::string, std::vector<std::size_t>> by_surgeon;
    for (std::size_t i = 0; i < cohort.pairs.size(); ++i) {
        all[i] = i;
        by_surgeon[cohort.pairs[i].surgeon_id].push_back(i);
    }
    report.summary = summarize(cohort, all, inputs, options);
    for (const auto& [surgeon, members] : by_surgeon)
        report.per_surgeon.emplace(surgeon, summarize(cohort, members, inputs, options));
    return report;
}

std::string report_json(const CohortReport& report) {
    ojson j;
    j["cohort"] = report.cohort;
    j["alpha"] = report.alpha;
    ojson ideals;
    for (auto f : kAllNasalFeatures) ideals[std::string(to_string(f))] = report.ideals[f];
    j["ideals"] = std::move(ideals);
    j["summary"] = summary_json(report.summary);
    ojson per;
    for (const auto& [surgeon, g] : report.per_surgeon) per[surgeon] = summary_json(g);
    j["per_surgeon"] = per.is_null() ? ojson::object() : per;
    auto failures = ojson::array();
    for (const auto& f : report.failures) failures.push_back({{"subject_id", f.subject_id}, {"error", f.error}});
    j["failures"] = std::move(failures);
    return j.dump(2) + "\n";
}

std::string feature_rows_csv(const CohortReport& report) {
    std::string out = "group,feature,n,improved_count,improved_rate,wilcoxon_p,t_test_p,significant\n";
    auto num = [](const auto& opt) { return opt ? fmt::format("{:.17g}", opt->p_value) : std::string(); };
    auto emit = [&](const std::string& group, const GroupSummary& g) {
        if (!g.nasal) return;
        for (const auto& r : g.nasal->per_feature)
            out += fmt::format("{},{},{},{},{:.17g},{},{},{}\n", group, to_string(r.feature), r.n, r.improved_count,
                               r.improved_rate, num(r.wilcoxon), num(r.t_test), r.significant ? 1 : 0);
    };
    emit("all", report.summary);
    for (const auto& [surgeon, g] : report.per_surgeon) emit(surgeon, g);
    return out;
}

std::string non_improved_csv(const CohortReport& report, const Cohort& cohort) {
    std::map<std::string, std::string> surgeon_of;
    for (const auto& p : cohort.pairs) surgeon_of[p.subject_id] = p.surgeon_id;
    std::string out = "subject_id,surgeon_id\n";
    if (report.summary.nasal)
        for (const auto& id : report.summary.nasal->non_improved) out += id + "," + surgeon_of[id] + "\n";
    return out;
}

}  // namespace facemorph
