#include "facemorph/alignment.hpp"
#include "facemorph/biometric.hpp"
#include "facemorph/cohort_report.hpp"
#include "facemorph/error.hpp"
#include "facemorph/landmarks.hpp"
#include "facemorph/nasal.hpp"
#include "facemorph/outcome.hpp"
#include "facemorph/pipeline.hpp"
#include "facemorph/stats.hpp"
#include "facemorph/symmetry.hpp"
#include "facemorph/synth.hpp"

#include <pybind11/gil_safe_call_once.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
namespace fm = facemorph;

namespace {

using PointArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<fm::Point2> to_points(const PointArray& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw fm::Error(fm::ErrorCode::InvalidArgument, "expected an (N, 2) array");
    std::vector<fm::Point2> out(static_cast<std::size_t>(a.shape(0)));
    auto r = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i) out[static_cast<std::size_t>(i)] = {r(i, 0), r(i, 1)};
    return out;
}

PointArray from_points(std::span<const fm::Point2> pts) {
    PointArray out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        w(static_cast<py::ssize_t>(i), 0) = pts[i].x;
        w(static_cast<py::ssize_t>(i), 1) = pts[i].y;
    }
    return out;
}

fm::ScoreSet score_set(std::vector<double> genuine, std::vector<double> imposter) {
    fm::ScoreSet s;
    s.genuine = std::move(genuine);
    s.imposter = std::move(imposter);
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Landmark morphometry for pre/post facial surgery comparisons";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result([&] {
        return py::reinterpret_steal<py::object>(
            PyErr_NewException("facemorph._core.FacemorphError", PyExc_RuntimeError, nullptr));
    });
    m.attr("FacemorphError") = error_type.get_stored();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const fm::Error& e) {
            const py::object& type = error_type.get_stored();
            py::object inst = type(e.what());
            inst.attr("code") = std::string(fm::to_string(e.code()));
            PyErr_SetObject(type.ptr(), inst.ptr());
        }
    });

    m.attr("LANDMARK_COUNT") = fm::kLandmarkCount;
    m.attr("CANVAS_SIZE") = fm::kCanvasSize;

    py::class_<fm::LandmarkScheme>(m, "LandmarkScheme")
        .def(py::init<>())
        .def_readwrite("outer_eye_l", &fm::LandmarkScheme::outer_eye_l)
        .def_readwrite("outer_eye_r", &fm::LandmarkScheme::outer_eye_r)
        .def_readwrite("nose_tip", &fm::LandmarkScheme::nose_tip)
        .def_readwrite("nostril_l", &fm::LandmarkScheme::nostril_l)
        .def_readwrite("nostril_r", &fm::LandmarkScheme::nostril_r)
        .def_readwrite("inner_eye_l", &fm::LandmarkScheme::inner_eye_l)
        .def_readwrite("inner_eye_r", &fm::LandmarkScheme::inner_eye_r)
        .def_readwrite("cheek_l", &fm::LandmarkScheme::cheek_l)
        .def_readwrite("cheek_r", &fm::LandmarkScheme::cheek_r)
        .def_readwrite("chin", &fm::LandmarkScheme::chin)
        .def_readwrite("forehead", &fm::LandmarkScheme::forehead)
        .def_readwrite("glabella", &fm::LandmarkScheme::glabella)
        .def_readwrite("nose_length_top", &fm::LandmarkScheme::nose_length_top)
        .def_readwrite("nose_length_bottom", &fm::LandmarkScheme::nose_length_bottom);

    py::class_<fm::AlignedFace>(m, "AlignedFace")
        .def_property_readonly("points", [](const fm::AlignedFace& a) { return from_points(a.points); })
        .def_readonly("midline_x", &fm::AlignedFace::midline_x)
        .def_readonly("interocular_px", &fm::AlignedFace::interocular_px)
        .def_readonly("canvas", &fm::AlignedFace::canvas);

    m.def("align_outer_eyes",
          [](const PointArray& pts, const fm::LandmarkScheme& s) { return fm::align_outer_eyes(to_points(pts), s); },
          py::arg("points"), py::arg("scheme") = fm::LandmarkScheme{});
    m.def("align_inner_eyes",
          [](const PointArray& pts, const fm::LandmarkScheme& s) { return fm::align_inner_eyes(to_points(pts), s); },
          py::arg("points"), py::arg("scheme") = fm::LandmarkScheme{});

    py::class_<fm::SymmetryResult>(m, "SymmetryResult")
        .def_readonly("score", &fm::SymmetryResult::score)
        .def_readonly("n_left", &fm::SymmetryResult::n_left)
        .def_readonly("n_right", &fm::SymmetryResult::n_right)
        .def_property_readonly("matches", [](const fm::SymmetryResult& r) {
            py::list out;
            for (const auto& mt : r.per_landmark) out.append(py::make_tuple(mt.left_index, mt.right_index, mt.distance));
            return out;
        });
    m.def("symmetry_score", [](const PointArray& pts, double mid) { return fm::symmetry_score(to_points(pts), mid); },
          py::arg("points"), py::arg("midline_x"));
    m.def("symmetry_score", py::overload_cast<const fm::AlignedFace&>(&fm::symmetry_score), py::arg("aligned"));

    py::class_<fm::NasalFeatureVector>(m, "NasalFeatureVector")
        .def(py::init([](double a, double b, double c, double d, double e) { return fm::NasalFeatureVector{a, b, c, d, e}; }),
             py::arg("aw_ic"), py::arg("aw_fw"), py::arg("nl_fh"), py::arg("tip_dev") = 0.0, py::arg("nostril_asym") = 0.0)
        .def_readwrite("aw_ic", &fm::NasalFeatureVector::aw_ic)
        .def_readwrite("aw_fw", &fm::NasalFeatureVector::aw_fw)
        .def_readwrite("nl_fh", &fm::NasalFeatureVector::nl_fh)
        .def_readwrite("tip_dev", &fm::NasalFeatureVector::tip_dev)
        .def_readwrite("nostril_asym", &fm::NasalFeatureVector::nostril_asym);

    py::class_<fm::IdealProfile>(m, "IdealProfile")
        .def(py::init<>())
        .def_readwrite("aw_ic", &fm::IdealProfile::aw_ic)
        .def_readwrite("aw_fw", &fm::IdealProfile::aw_fw)
        .def_readwrite("nl_fh", &fm::IdealProfile::nl_fh)
        .def_readwrite("tip_dev", &fm::IdealProfile::tip_dev)
        .def_readwrite("nostril_asym", &fm::IdealProfile::nostril_asym);

    py::class_<fm::NasalImprovement>(m, "NasalImprovement")
        .def_readonly("significant_improved_count", &fm::NasalImprovement::significant_improved_count)
        .def_readonly("improved_any", &fm::NasalImprovement::improved_any)
        .def_property_readonly("improved", [](const fm::NasalImprovement& imp) {
            py::dict out;
            for (auto f : fm::kAllNasalFeatures) out[py::str(std::string(fm::to_string(f)))] = imp[f].improved;
            return out;
        });

    m.def("nasal_features", &fm::nasal_features, py::arg("aligned"), py::arg("scheme") = fm::LandmarkScheme{});
    m.def("improvement", &fm::improvement, py::arg("before"), py::arg("after"), py::arg("ideals") = fm::IdealProfile{});

    py::enum_<fm::OutcomeCategory>(m, "OutcomeCategory")
        .value("Both", fm::OutcomeCategory::Both)
        .value("OnlySymmetric", fm::OutcomeCategory::OnlySymmetric)
        .value("OnlyYounger", fm::OutcomeCategory::OnlyYounger)
        .value("Neither", fm::OutcomeCategory::Neither);
    m.def("categorize", &fm::categorize, py::arg("delta_symmetry"), py::arg("delta_age"));

    m.def("cosine_similarity", [](const std::vector<double>& a, const std::vector<double>& b) {
        return fm::cosine_similarity(a, b);
    });

    py::class_<fm::OperatingPoint>(m, "OperatingPoint")
        .def_readonly("target_fmr", &fm::OperatingPoint::target_fmr)
        .def_readonly("threshold", &fm::OperatingPoint::threshold)
        .def_readonly("tmr", &fm::OperatingPoint::tmr)
        .def_readonly("fmr", &fm::OperatingPoint::fmr)
        .def_readonly("n_genuine", &fm::OperatingPoint::n_genuine)
        .def_readonly("n_imposter", &fm::OperatingPoint::n_imposter)
        .def_readonly("degenerate_fmr", &fm::OperatingPoint::degenerate_fmr);
    m.def("tmr_at_fmr",
          [](std::vector<double> g, std::vector<double> i, double target) {
              return fm::tmr_at_fmr(score_set(std::move(g), std::move(i)), target);
          },
          py::arg("genuine"), py::arg("imposter"), py::arg("target_fmr") = 1e-4);
    m.def("roc",
          [](std::vector<double> g, std::vector<double> i) {
              py::list out;
              for (const auto& p : fm::roc(score_set(std::move(g), std::move(i))))
                  out.append(py::make_tuple(p.threshold, p.fmr, p.tmr));
              return out;
          },
          py::arg("genuine"), py::arg("imposter"));

    py::class_<fm::WilcoxonResult>(m, "WilcoxonResult")
        .def_readonly("p_value", &fm::WilcoxonResult::p_value)
        .def_readonly("w_plus", &fm::WilcoxonResult::w_plus)
        .def_readonly("n_used", &fm::WilcoxonResult::n_used)
        .def_readonly("n_dropped", &fm::WilcoxonResult::n_dropped)
        .def_readonly("exact", &fm::WilcoxonResult::exact);
    py::class_<fm::TTestResult>(m, "TTestResult")
        .def_readonly("p_value", &fm::TTestResult::p_value)
        .def_readonly("t", &fm::TTestResult::t)
        .def_readonly("mean_difference", &fm::TTestResult::mean_difference)
        .def_readonly("dof", &fm::TTestResult::dof);
    m.def("wilcoxon_signed_rank", [](const std::vector<double>& b, const std::vector<double>& a) {
        return fm::wilcoxon_signed_rank(b, a);
    }, py::arg("before"), py::arg("after"));
    m.def("paired_t_test", [](const std::vector<double>& b, const std::vector<double>& a) {
        return fm::paired_t_test(b, a);
    }, py::arg("before"), py::arg("after"));

    m.def("read_record",
          [](const std::filesystem::path& path) {
              const auto rec = fm::read_face_record(path);
              py::dict out;
              out["image_id"] = rec.image_id;
              out["subject_id"] = rec.subject_id;
              out["role"] = std::string(fm::to_string(rec.role));
              out["landmarks"] = from_points(rec.landmarks.points());
              out["apparent_age"] = rec.apparent_age ? py::cast(*rec.apparent_age) : py::none();
              out["embedding"] = rec.embedding ? py::cast(*rec.embedding) : py::none();
              return out;
          },
          py::arg("path"), "Read and validate one record; landmarks are returned in pixels.");

    m.def("synth",
          [](const std::filesystem::path& out, std::uint64_t seed, std::size_t n, double asymmetry_noise,
             double nasal_noise) {
              fm::SynthSpec spec;
              spec.seed = seed;
              spec.n_subjects = n;
              spec.asymmetry_noise_px = asymmetry_noise;
              spec.nasal_noise_fraction = nasal_noise;
              const auto synth = fm::run_synth(spec, out);
              return synth.cohort.pairs.size();
          },
          py::arg("out"), py::arg("seed") = 42, py::arg("n") = 366, py::arg("asymmetry_noise") = 1.0,
          py::arg("nasal_noise") = 0.0, "Write a synthetic fixture cohort; returns the subject count.");

    m.def("validate",
          [](const std::filesystem::path& manifest) {
              fm::RunConfig cfg;
              cfg.manifest = manifest;
              std::ostringstream log;
              const auto v = fm::run_validate(cfg, log);
              return py::make_tuple(v.exit == fm::ExitCode::ok, v.records_valid, v.messages);
          },
          py::arg("manifest"), "Returns (ok, records_valid, failure_messages).");

    m.def("analyze_json",
          [](const std::filesystem::path& manifest, const std::filesystem::path& out, std::optional<std::string> procedure,
             double alpha, double fmr, bool keep_going, unsigned workers) {
              fm::RunConfig cfg;
              cfg.manifest = manifest;
              cfg.out = out;
              cfg.procedure = std::move(procedure);
              cfg.alpha = alpha;
              cfg.target_fmr = fmr;
              cfg.keep_going = keep_going;
              cfg.workers = workers;
              cfg.validate(true);
              std::ostringstream log;
              py::gil_scoped_release release;
              return fm::report_json(fm::run_analyze(cfg, log).report);
          },
          py::arg("manifest"), py::arg("out"), py::arg("procedure") = py::none(), py::arg("alpha") = 0.001,
          py::arg("fmr") = 1e-4, py::arg("keep_going") = false, py::arg("workers") = 0);
}
