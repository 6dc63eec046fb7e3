#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "limbmap/cli.hpp"
#include "limbmap/error.hpp"
#include "limbmap/simulation.hpp"

namespace py = pybind11;
using namespace limbmap;

namespace {

std::vector<UpperFeature> upper_rows(const Eigen::MatrixXd& X) {
    if (X.cols() != 4) throw py::value_error("X must have 4 columns");
    std::vector<UpperFeature> out(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = {X.row(i).transpose(), static_cast<std::size_t>(i)};
    return out;
}

std::vector<LowerFeature> lower_rows(const Eigen::MatrixXd& Y) {
    if (Y.cols() != 4) throw py::value_error("Y must have 4 columns");
    std::vector<LowerFeature> out(static_cast<std::size_t>(Y.rows()));
    for (Eigen::Index i = 0; i < Y.rows(); ++i) out[i] = {Y.row(i).transpose(), static_cast<std::size_t>(i)};
    return out;
}

PerJoint<std::vector<double>> traces_of(const py::dict& samples) {
    PerJoint<std::vector<double>> out;
    for (Joint j : kAllJoints) {
        const std::string name(joint_name(j));
        if (!samples.contains(name)) throw py::value_error("missing joint '" + name + "'");
        out[index_of(j)] = samples[name.c_str()].cast<std::vector<double>>();
    }
    return out;
}

py::dict curves_of(const PerJoint<std::vector<double>>& curves) {
    py::dict d;
    for (Joint j : kAllJoints) d[py::str(std::string(joint_name(j)))] = curves[index_of(j)];
    return d;
}

}  // namespace

PYBIND11_MODULE(_limbmap, m) {
    m.doc() = "Upper-limb to lower-limb gait mapping";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
    error.call_once_and_store_result([&]() { return py::exception<Error>(m, "LimbmapError", PyExc_RuntimeError); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object type = error.get_stored();
            py::object inst = type(e.what());
            inst.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(type.ptr(), inst.ptr());
        }
    });

    py::class_<GaitRecording>(m, "GaitRecording")
        .def(py::init([](const py::dict& samples, double rate) { return GaitRecording(traces_of(samples), rate); }),
             py::arg("samples"), py::arg("sample_rate"))
        .def_property_readonly("sample_rate", &GaitRecording::sample_rate)
        .def_property_readonly("duration", &GaitRecording::duration)
        .def("__len__", &GaitRecording::size)
        .def("samples", [](const GaitRecording& r, const std::string& j) { return r.samples(joint_from_name(j)); });

    m.def("load_recording", &load_recording, py::arg("path"));
    m.def("write_recording", &write_recording, py::arg("path"), py::arg("recording"));

    py::class_<CycleTruth>(m, "CycleTruth")
        .def_readonly("cycle_index", &CycleTruth::cycle_index)
        .def_readonly("start_sample", &CycleTruth::start_sample)
        .def_readonly("end_sample", &CycleTruth::end_sample)
        .def_readonly("upper", &CycleTruth::upper)
        .def_readonly("lower", &CycleTruth::lower);

    m.def(
        "synthesize",
        [](std::size_t cycles, std::uint64_t seed, double period, double sample_rate, double noise_std,
           double spike_rate, double period_jitter, double amplitude_jitter, double offset_jitter) {
            SynthParams p;
            p.n_cycles = cycles;
            p.seed = seed;
            p.base_period = period;
            p.sample_rate = sample_rate;
            p.noise_std = noise_std;
            p.spike_rate = spike_rate;
            p.period_jitter = period_jitter;
            p.amplitude_jitter = amplitude_jitter;
            p.offset_jitter = offset_jitter;
            SyntheticRecording s = synthesize_recording(p);
            return py::make_tuple(std::move(s.recording), std::move(s.truth));
        },
        py::arg("cycles") = 40, py::arg("seed") = 1, py::arg("period") = 1.0, py::arg("sample_rate") = 100.0,
        py::arg("noise_std") = 0.0, py::arg("spike_rate") = 0.0, py::arg("period_jitter") = 0.04,
        py::arg("amplitude_jitter") = 0.08, py::arg("offset_jitter") = 1.5,
        "Synthetic recording and its per-cycle ground truth");

    py::class_<GaitCycle>(m, "GaitCycle")
        .def_readonly("index", &GaitCycle::index)
        .def_readonly("start_sample", &GaitCycle::start_sample)
        .def_readonly("end_sample", &GaitCycle::end_sample)
        .def_readonly("period", &GaitCycle::period)
        .def_property_readonly("curves", [](const GaitCycle& c) { return curves_of(c.curves); });

    m.def(
        "segment_cycles",
        [](const GaitRecording& r, std::size_t grid, std::size_t curve_smoothing) {
            SegmentationConfig cfg;
            cfg.grid_size = grid;
            cfg.curve_smoothing = curve_smoothing;
            return segment_cycles(r, cfg);
        },
        py::arg("recording"), py::arg("grid_size") = 100, py::arg("curve_smoothing") = 1);

    py::class_<ChangeRateBand>(m, "ChangeRateBand")
        .def("__str__", &format_band)
        .def_static("parse", &parse_band);
    m.def("load_band", &load_band, py::arg("path"));

    py::class_<LinearMap>(m, "LinearMap")
        .def(py::init([](const Mat4& T, const Vec4& b) { return LinearMap{T, b}; }), py::arg("T"), py::arg("b"))
        .def_readonly("T", &LinearMap::T)
        .def_readonly("b", &LinearMap::b)
        .def("apply", &LinearMap::apply, py::arg("x"))
        .def("__str__", &format_map);
    m.def("load_map", &load_map, py::arg("path"));

    py::class_<ResidualStats>(m, "ResidualStats")
        .def_readonly("mean", &ResidualStats::mean)
        .def_readonly("std", &ResidualStats::std)
        .def_readonly("count", &ResidualStats::count)
        .def("__str__", &format_residual_table);

    m.def(
        "identify",
        [](const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
            const Identification id = identify(upper_rows(X), lower_rows(Y));
            return py::make_tuple(id.map, id.residuals);
        },
        py::arg("X"), py::arg("Y"), "Least-squares map from m x 4 upper features to m x 4 lower features");

    m.def(
        "kmeans",
        [](const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed) {
            const KMeansResult r = kmeans(points, k, seed);
            return py::make_tuple(r.labels, r.centroids, r.wcss_history);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0);

    py::class_<ReferenceSet>(m, "ReferenceSet")
        .def_property_readonly("vectors", &ReferenceSet::vectors)
        .def_property_readonly("condition", &ReferenceSet::condition)
        .def("__str__", &format_references)
        .def_static("parse", &parse_references);
    m.def("load_references", &load_references, py::arg("path"));

    m.def(
        "solve_weights",
        [](const Vec4& mapped, const ReferenceSet& refs) {
            const RestorationWeights w = solve_weights(mapped, refs);
            return py::make_tuple(w.a, w.ill_conditioned);
        },
        py::arg("mapped"), py::arg("references"));
    m.def(
        "restore_curve",
        [](const Vec4& a, const ReferenceSet& refs, std::size_t n) {
            RestorationWeights w;
            w.a = a;
            const LowerCurves c = restore_curve(w, refs, n);
            return py::make_tuple(c.hip, c.knee);
        },
        py::arg("weights"), py::arg("references"), py::arg("n") = 100);

    py::class_<TrainedModels>(m, "TrainedModels")
        .def_readonly("band", &TrainedModels::band)
        .def_property_readonly("map", [](const TrainedModels& t) { return t.identification.map; })
        .def_property_readonly("residuals", [](const TrainedModels& t) { return t.identification.residuals; })
        .def_readonly("references", &TrainedModels::references)
        .def_property_readonly("cycle_count", [](const TrainedModels& t) { return t.cycles.size(); });
    m.def(
        "train",
        [](const GaitRecording& r, std::size_t k, std::uint64_t seed, std::size_t curve_smoothing) {
            TrainingConfig cfg;
            cfg.cluster.k = k;
            cfg.cluster.seed = seed;
            cfg.segmentation.curve_smoothing = curve_smoothing;
            return train_models(r, cfg);
        },
        py::arg("recording"), py::arg("k") = 9, py::arg("seed") = 0, py::arg("curve_smoothing") = 1);

    py::class_<CycleEmission>(m, "CycleEmission")
        .def_readonly("input_cycle", &CycleEmission::input_cycle)
        .def_readonly("emit_cycle", &CycleEmission::emit_cycle)
        .def_readonly("held", &CycleEmission::held)
        .def_readonly("start_sample", &CycleEmission::start_sample)
        .def_readonly("mapped", &CycleEmission::mapped)
        .def_readonly("hip", &CycleEmission::hip)
        .def_readonly("knee", &CycleEmission::knee);

    py::class_<PipelineOutput>(m, "PipelineOutput")
        .def_readonly("cycles", &PipelineOutput::cycles)
        .def_readonly("emissions", &PipelineOutput::emissions)
        .def_readonly("holds", &PipelineOutput::holds)
        .def_property_readonly("skipped", [](const PipelineOutput& o) {
            std::vector<std::size_t> out;
            for (const SkippedCycle& s : o.skipped) out.push_back(s.cycle);
            return out;
        })
        .def("trajectory_csv", &format_trajectory);
    m.def(
        "run_pipeline",
        [](const GaitRecording& r, const TrainedModels& t, double nominal_period, std::size_t curve_smoothing) {
            PipelineConfig cfg;
            cfg.nominal_period = nominal_period;
            cfg.segmentation.curve_smoothing = curve_smoothing;
            return run_pipeline(r, {t.band, t.identification.map, t.references}, cfg);
        },
        py::arg("recording"), py::arg("models"), py::arg("nominal_period") = 1.0, py::arg("curve_smoothing") = 1);

    py::class_<ErrorReport>(m, "ErrorReport")
        .def_property_readonly("phase_error", [](const ErrorReport& r) { return py::make_tuple(r.phase_error.mean, r.phase_error.std); })
        .def_property_readonly("amplitude_error", [](const ErrorReport& r) {
            py::dict d;
            d["hip"] = py::make_tuple(r.amplitude_error.hip.mean, r.amplitude_error.hip.std);
            d["knee"] = py::make_tuple(r.amplitude_error.knee.mean, r.amplitude_error.knee.std);
            return d;
        })
        .def_property_readonly("phase_difference", [](const ErrorReport& r) { return py::make_tuple(r.phase_difference.mean, r.phase_difference.std); })
        .def_property_readonly("baseline", [](const ErrorReport& r) { return py::make_tuple(r.baseline.mean, r.baseline.std); })
        .def_readonly("compared_cycles", &ErrorReport::compared_cycles);
    m.def(
        "analyze",
        [](const PipelineOutput& out, const ChangeRateBand* band) { return analyze_run(out, band); },
        py::arg("output"), py::arg("band") = nullptr);
    m.def(
        "error_report_csv", [](const std::vector<ErrorReport>& r) { return format_error_report(r); },
        py::arg("reports"));
    m.def(
        "circular_lag", [](const std::vector<double>& a, const std::vector<double>& b) { return circular_lag(a, b); },
        py::arg("a"), py::arg("b"));

    m.def(
        "run_cli", [](const std::vector<std::string>& args) { return run_cli(args); }, py::arg("args"),
        "Runs the command line with `args` (without the program name) and returns its exit code");
}
