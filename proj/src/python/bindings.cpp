#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "taycast/bench.hpp"
#include "taycast/errors.hpp"
#include "taycast/model.hpp"
#include "taycast/synth.hpp"
#include "taycast/train.hpp"

namespace py = pybind11;
using namespace taycast;

namespace {

std::string require_kind_name(ModelKind kind) { return to_string(kind); }

ModelKind kind_from_name(const std::string& name) {
    const auto kind = model_kind_from_string(name);
    if (!kind) throw ConfigError("unknown model kind '" + name + "'");
    return *kind;
}

SyntheticSpec::Family family_from_name(const std::string& name) {
    const auto family = family_from_string(name);
    if (!family) throw ConfigError("unknown synthetic family '" + name + "'");
    return *family;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Taylor-expansion neural predictors and benchmark harness for univariate "
              "time series";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def(py::init([](const std::string& kind, std::size_t input_len, std::size_t hidden_size,
                         double delta_t, int substeps) {
                 ModelSpec spec;
                 spec.kind = kind_from_name(kind);
                 spec.input_len = input_len;
                 spec.hidden_size = hidden_size;
                 spec.delta_t = delta_t;
                 spec.substeps = substeps;
                 spec.validate();
                 return spec;
             }),
             py::arg("kind"), py::arg("input_len"), py::arg("hidden_size") = 128,
             py::arg("delta_t") = 1.0, py::arg("substeps") = 1)
        .def_property_readonly("kind",
                               [](const ModelSpec& s) { return require_kind_name(s.kind); })
        .def_readonly("input_len", &ModelSpec::input_len)
        .def_readonly("hidden_size", &ModelSpec::hidden_size)
        .def_readonly("delta_t", &ModelSpec::delta_t)
        .def_readonly("substeps", &ModelSpec::substeps)
        .def_property_readonly("output_len", &ModelSpec::output_len)
        .def("__repr__", [](const ModelSpec& s) {
            return "ModelSpec(kind='" + require_kind_name(s.kind) +
                   "', input_len=" + std::to_string(s.input_len) + ")";
        });

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init([](double learning_rate, std::uint64_t seed, int max_epochs, int patience,
                         std::size_t batch_size) {
                 TrainConfig c;
                 c.learning_rate = learning_rate;
                 c.seed = seed;
                 c.max_epochs = max_epochs;
                 c.patience = patience;
                 c.batch_size = batch_size;
                 return c;
             }),
             py::arg("learning_rate") = 0.01, py::arg("seed") = 0, py::arg("max_epochs") = 2000,
             py::arg("patience") = 50, py::arg("batch_size") = 32)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_readwrite("batch_size", &TrainConfig::batch_size);

    // Params is a std::variant of these two; pybind converts it to and
    // from the registered alternatives.
    py::class_<MlpParams>(m, "MlpParams")
        .def_property_readonly("input_len", &MlpParams::input_len)
        .def_property_readonly("hidden_size", &MlpParams::hidden_size)
        .def_property_readonly("output_len", &MlpParams::output_len)
        .def("__repr__", [](const MlpParams& p) {
            return "MlpParams(" + std::to_string(p.input_len()) + " -> " +
                   std::to_string(p.hidden_size()) + " -> " + std::to_string(p.output_len()) +
                   ")";
        });
    py::class_<LstmParams>(m, "LstmParams")
        .def_property_readonly("hidden_size", &LstmParams::hidden_size)
        .def("__repr__", [](const LstmParams& p) {
            return "LstmParams(hidden=" + std::to_string(p.hidden_size()) + ")";
        });

    py::class_<WindowSet>(m, "WindowSet")
        .def_property_readonly("count", &WindowSet::count)
        .def_readonly("input_len", &WindowSet::input_len)
        .def_property_readonly("targets", [](const WindowSet& ws) { return ws.targets; })
        .def("window", [](const WindowSet& ws, std::size_t i) {
            if (i >= ws.count()) throw py::index_error();
            const auto w = ws.window(i);
            return Vector(w.begin(), w.end());
        });

    py::class_<ScalingParams>(m, "ScalingParams")
        .def_readonly("min_val", &ScalingParams::min_val)
        .def_readonly("max_val", &ScalingParams::max_val)
        .def_readonly("degenerate", &ScalingParams::degenerate);

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("best_params", &TrainReport::best_params)
        .def_readonly("best_val_mse", &TrainReport::best_val_mse)
        .def_readonly("train_mse", &TrainReport::train_mse)
        .def_readonly("test_mse", &TrainReport::test_mse)
        .def_readonly("epochs_run", &TrainReport::epochs_run)
        .def_readonly("diverged", &TrainReport::diverged)
        .def_readonly("loss_curve", &TrainReport::loss_curve);

    // data
    m.def("load_series",
          [](const std::string& path, const std::string& column, bool has_header) {
              return load_series(path, column, has_header).values;
          },
          py::arg("path"), py::arg("column") = "0", py::arg("has_header") = false);
    m.def("split_series",
          [](const Vector& values, double train_frac, double val_frac, double test_frac) {
              TimeSeries s;
              s.values = values;
              const auto segs = split_series(s, SplitSpec{train_frac, val_frac, test_frac});
              return py::make_tuple(segs[0].values, segs[1].values, segs[2].values);
          },
          py::arg("values"), py::arg("train_frac") = 0.7, py::arg("val_frac") = 0.15,
          py::arg("test_frac") = 0.15);
    m.def("fit_scaler", [](const Vector& values) {
        TimeSeries s;
        s.values = values;
        return fit_scaler(s);
    });
    m.def("apply_scaler",
          [](const ScalingParams& p, const Vector& v) { return apply_scaler(p, v); });
    m.def("invert_scaler",
          [](const ScalingParams& p, const Vector& v) { return invert_scaler(p, v); });
    m.def("make_windows",
          [](const Vector& values, std::size_t input_len) { return make_windows(values, input_len); },
          py::arg("values"), py::arg("input_len"));

    // models
    m.def("init_params", &init_params, py::arg("spec"), py::arg("seed") = 0);
    m.def("zero_heads", [](MlpParams& params) { zero_heads(params); });
    m.def("predict",
          [](const Params& params, const ModelSpec& spec, const Vector& window) {
              return predict(params, spec, window);
          },
          py::arg("params"), py::arg("spec"), py::arg("window"));
    m.def("recursive_rollout",
          [](const std::function<std::vector<Vector>(Vector)>& field, const Vector& window,
             double delta_t, int substeps, int order) {
              const DerivativeField f = [&field](std::span<const double> s) {
                  return field(Vector(s.begin(), s.end()));
              };
              return recursive_rollout(f, window, delta_t, substeps, order);
          },
          py::arg("field"), py::arg("window"), py::arg("delta_t") = 1.0, py::arg("substeps") = 1,
          py::arg("order") = 1);

    // training
    m.def("train_model",
          [](const ModelSpec& spec, const WindowSet& train, const WindowSet& val,
             const TrainConfig& config, const WindowSet* test) {
              return train_model(spec, train, val, config, test);
          },
          py::arg("spec"), py::arg("train"), py::arg("val"), py::arg("config"),
          py::arg("test") = nullptr);
    m.def("evaluate", &evaluate, py::arg("params"), py::arg("spec"), py::arg("windows"));

    // benchmark grid
    py::class_<RunRecord>(m, "RunRecord")
        .def_readonly("dataset", &RunRecord::dataset)
        .def_property_readonly("model",
                               [](const RunRecord& r) { return require_kind_name(r.model); })
        .def_readonly("learning_rate", &RunRecord::learning_rate)
        .def_readonly("input_len", &RunRecord::input_len)
        .def_readonly("seed", &RunRecord::seed)
        .def_readonly("substeps", &RunRecord::substeps)
        .def_readonly("epochs_run", &RunRecord::epochs_run)
        .def_readonly("train_mse", &RunRecord::train_mse)
        .def_readonly("val_mse", &RunRecord::val_mse)
        .def_readonly("test_mse", &RunRecord::test_mse)
        .def_property_readonly("status",
                               [](const RunRecord& r) { return std::string(to_string(r.status)); })
        .def_readonly("note", &RunRecord::note);

    py::class_<BestTable>(m, "BestTable")
        .def_readonly("datasets", &BestTable::datasets)
        .def_property_readonly("models",
                               [](const BestTable& t) {
                                   std::vector<std::string> names;
                                   for (ModelKind k : t.models) names.emplace_back(to_string(k));
                                   return names;
                               })
        .def_readonly("cells", &BestTable::cells);

    py::class_<AggregateReport>(m, "AggregateReport")
        .def_readonly("table", &AggregateReport::table)
        .def_readonly("avg_rank", &AggregateReport::avg_rank)
        .def_readonly("median_pct_dev", &AggregateReport::median_pct_dev)
        .def_readonly("winners", &AggregateReport::winners)
        .def_readonly("warnings", &AggregateReport::warnings);

    m.def("parse_run_manifest", &parse_run_manifest, py::arg("path"));
    m.def("run_grid_file",
          [](const std::string& manifest_path) { return run_grid(parse_run_manifest(manifest_path)); },
          py::arg("manifest_path"));
    m.def("read_records_csv", &read_records_csv, py::arg("path"));
    m.def("write_records_csv", &write_records_csv, py::arg("records"), py::arg("path"));
    m.def("aggregate", &aggregate, py::arg("records"));
    m.def("emit_report", &emit_report, py::arg("records"), py::arg("report"),
          py::arg("output_dir"));

    py::class_<RunManifest>(m, "RunManifest")
        .def_readonly("output_dir", &RunManifest::output_dir)
        .def_readonly("workers", &RunManifest::workers);
    m.def("run_grid", &run_grid, py::arg("manifest"));

    // synthetic dynamics and the derivative probe
    py::class_<SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init([](const std::string& family, double slope, double x0, double amplitude,
                         double omega, double rate, double capacity, std::size_t n,
                         double delta_t, double noise_sigma, std::uint64_t seed) {
                 SyntheticSpec spec;
                 spec.family = family_from_name(family);
                 spec.slope = slope;
                 spec.x0 = x0;
                 spec.amplitude = amplitude;
                 spec.omega = omega;
                 spec.rate = rate;
                 spec.capacity = capacity;
                 spec.n = n;
                 spec.delta_t = delta_t;
                 spec.noise_sigma = noise_sigma;
                 spec.seed = seed;
                 spec.validate();
                 return spec;
             }),
             py::arg("family"), py::arg("slope") = 1.0, py::arg("x0") = 0.0,
             py::arg("amplitude") = 1.0, py::arg("omega") = 1.0, py::arg("rate") = 1.0,
             py::arg("capacity") = 1.0, py::arg("n") = 100, py::arg("delta_t") = 1.0,
             py::arg("noise_sigma") = 0.0, py::arg("seed") = 0);

    py::class_<AnnotatedSeries>(m, "AnnotatedSeries")
        .def_property_readonly("values",
                               [](const AnnotatedSeries& s) { return s.series.values; })
        .def_readonly("d1", &AnnotatedSeries::d1)
        .def_readonly("d2", &AnnotatedSeries::d2)
        .def_readonly("d3", &AnnotatedSeries::d3);

    m.def("generate", &generate, py::arg("spec"));

    py::class_<ProbeOrderStats>(m, "ProbeOrderStats")
        .def_readonly("order", &ProbeOrderStats::order)
        .def_readonly("rmse", &ProbeOrderStats::rmse)
        .def_readonly("correlation_defined", &ProbeOrderStats::correlation_defined)
        .def_readonly("correlation", &ProbeOrderStats::correlation)
        .def_readonly("note", &ProbeOrderStats::note);

    py::class_<ProbeReport>(m, "ProbeReport")
        .def_readonly("orders", &ProbeReport::orders)
        .def_readonly("sample_count", &ProbeReport::sample_count);
}
