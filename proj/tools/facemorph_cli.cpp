// facemorph: batch validation, analysis, and fixture generation for paired
// pre/post facial landmark records.

#include "facemorph/error.hpp"
#include "facemorph/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace fm = facemorph;

namespace {

void init_logging() {
    auto logger = spdlog::stderr_color_mt("facemorph");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("FACEMORPH_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(env));
}

std::pair<std::size_t, std::size_t> parse_endpoints(const std::string& text) {
    std::size_t a = 0, b = 0;
    char comma = 0;
    std::istringstream in(text);
    if (!(in >> a >> comma >> b) || comma != ',' || !in.eof())
        throw fm::Error(fm::ErrorCode::InvalidArgument, "--nose-length-endpoints expects TOP,BOTTOM (e.g. 168,1)");
    return {a, b};
}

}  // namespace

int main(int argc, char** argv) {
    init_logging();

    CLI::App app{"Landmark morphometry for paired pre/post facial surgery records"};
    app.set_config("--config", "", "key = value config file; command-line flags take precedence");
    app.require_subcommand(1);

    fm::RunConfig cfg;
    std::string procedure;
    std::string endpoints;
    std::string imposter_mode = "pre-post";
    std::vector<std::string> skip;

    auto add_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--manifest", cfg.manifest, "Cohort manifest CSV")->required();
        cmd->add_option("--records", cfg.records, "Directory that relative record paths resolve against "
                                                  "(default: the manifest's directory)");
    };

    auto* validate = app.add_subcommand("validate", "Check every record referenced by a manifest");
    add_inputs(validate);

    auto* analyze = app.add_subcommand("analyze", "Run symmetry, nasal, outcome and biometric analysis");
    add_inputs(analyze);
    analyze->add_option("--out", cfg.out, "Output directory")->required();
    analyze->add_option("--procedure", procedure, "Only analyze subjects carrying this procedure tag");
    analyze->add_option("--alpha", cfg.alpha, "Significance level")->capture_default_str();
    analyze->add_option("--fmr", cfg.target_fmr, "Target false match rate")->capture_default_str();
    analyze->add_option("--ideal-nlfh", cfg.ideals.nl_fh, "Ideal nose length / face height ratio")->capture_default_str();
    analyze->add_option("--ideal-awic", cfg.ideals.aw_ic, "Ideal alar width / intercanthal ratio")->capture_default_str();
    analyze->add_option("--ideal-awfw", cfg.ideals.aw_fw, "Ideal alar width / face width ratio")->capture_default_str();
    analyze->add_option("--nose-length-endpoints", endpoints, "Landmark indices TOP,BOTTOM for nose length (default 168,1)");
    analyze->add_option("--imposter-mode", imposter_mode, "pre-post or all-cross")
        ->check(CLI::IsMember({"pre-post", "all-cross"}));
    analyze->add_option("--skip", skip, "Analyses to disable: symmetry, nasal, outcomes, biometric")
        ->check(CLI::IsMember({"symmetry", "nasal", "outcomes", "biometric"}))
        ->delimiter(',');
    analyze->add_flag("--keep-going", cfg.keep_going, "Skip failing subjects instead of aborting");
    analyze->add_flag("--write-aligned", cfg.write_aligned, "Also write aligned landmark JSON per image");
    analyze->add_option("--workers", cfg.workers, "Worker threads (0 = all cores)");

    fm::SynthSpec spec;
    std::filesystem::path synth_out;
    long long n_subjects = static_cast<long long>(spec.n_subjects);
    auto* synth = app.add_subcommand("synth", "Write a synthetic fixture cohort with ground truth");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
    synth->add_option("--n", n_subjects, "Number of subjects")->capture_default_str();
    synth->add_option("--asymmetry-noise", spec.asymmetry_noise_px, "One-sided jitter sigma (px)")->capture_default_str();
    synth->add_option("--nasal-noise", spec.nasal_noise_fraction, "Nasal landmark jitter as a fraction of the planted effect")
        ->capture_default_str();
    synth->add_option("--improve-probs", spec.planted_improve_probs, "Planted improvement probabilities aw_ic aw_fw nl_fh")
        ->expected(3);
    synth->add_option("--symmetry-prob", spec.symmetry_improve_prob, "Fraction planted as more symmetric")
        ->capture_default_str();
    synth->add_option("--age-shift-mean", spec.age_shift_mean, "Mean apparent-age change (years)")->capture_default_str();
    synth->add_option("--age-shift-sigma", spec.age_shift_sigma, "Apparent-age change sigma (years)")->capture_default_str();
    synth->add_option("--embedding-dim", spec.embedding_dim, "Embedding dimension")->capture_default_str();
    synth->add_option("--genuine-noise", spec.genuine_noise, "Post-embedding perturbation sigma")->capture_default_str();
    synth->add_option("--surgeons", spec.n_surgeons, "Number of surgeons")->capture_default_str();
    synth->add_option("--rhinoplasty-fraction", spec.rhinoplasty_fraction, "Fraction tagged rhinoplasty")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(fm::ExitCode::config_error);
    }

    try {
        if (*synth) {
            if (n_subjects < 0) throw fm::Error(fm::ErrorCode::InvalidArgument, "--n must be non-negative");
            spec.n_subjects = static_cast<std::size_t>(n_subjects);
            spec.validate();
        } else {
            if (!procedure.empty()) cfg.procedure = procedure;
            if (!endpoints.empty()) std::tie(cfg.scheme.nose_length_top, cfg.scheme.nose_length_bottom) = parse_endpoints(endpoints);
            cfg.imposter_mode = imposter_mode == "all-cross" ? fm::ImposterMode::all_cross : fm::ImposterMode::pre_vs_post;
            for (const auto& s : skip) {
                if (s == "symmetry") cfg.run_symmetry = false;
                if (s == "nasal") cfg.run_nasal = false;
                if (s == "outcomes") cfg.run_outcomes = false;
                if (s == "biometric") cfg.run_biometric = false;
            }
            cfg.validate(analyze->parsed());
        }
    } catch (const fm::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return static_cast<int>(fm::ExitCode::config_error);
    }

    try {
        if (*validate) return static_cast<int>(fm::run_validate(cfg, std::cout).exit);
        if (*analyze) return static_cast<int>(fm::run_analyze(cfg, std::cout).exit);
        const auto cohort = fm::run_synth(spec, synth_out);
        std::cout << fmt::format("wrote {} subjects ({} records) to {}\n", cohort.cohort.pairs.size(),
                                 2 * cohort.cohort.pairs.size(), synth_out.string());
        return 0;
    } catch (const fm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(fm::exit_code_for(e));
    }
}
