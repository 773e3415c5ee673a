#include "taycast/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "taycast/errors.hpp"
#include "taycast/manifest.hpp"
#include "taycast/rng.hpp"

namespace taycast {

const char* to_string(SyntheticSpec::Family family) {
    switch (family) {
    case SyntheticSpec::Family::Ramp: return "ramp";
    case SyntheticSpec::Family::Sine: return "sine";
    case SyntheticSpec::Family::Exponential: return "exponential";
    case SyntheticSpec::Family::Logistic: return "logistic";
    }
    return "unknown";
}

std::optional<SyntheticSpec::Family> family_from_string(std::string_view name) {
    for (auto f : {SyntheticSpec::Family::Ramp, SyntheticSpec::Family::Sine,
                   SyntheticSpec::Family::Exponential, SyntheticSpec::Family::Logistic}) {
        if (name == to_string(f)) return f;
    }
    return std::nullopt;
}

void SyntheticSpec::validate() const {
    if (n < 2) throw ConfigError("synthetic spec: n must be >= 2");
    if (!(delta_t >= 0.0) || !std::isfinite(delta_t)) {
        throw ConfigError("synthetic spec: delta_t must be finite and >= 0");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ConfigError("synthetic spec: noise_sigma must be finite and >= 0");
    }
    for (double v : {slope, x0, amplitude, omega, rate, capacity}) {
        if (!std::isfinite(v)) throw ConfigError("synthetic spec: non-finite family parameter");
    }
    if (family == Family::Logistic) {
        if (!(capacity > 0.0)) throw ConfigError("synthetic spec: logistic capacity must be > 0");
        if (!(x0 > 0.0)) throw ConfigError("synthetic spec: logistic x0 must be > 0");
    }
}

AnnotatedSeries generate(const SyntheticSpec& spec) {
    spec.validate();
    AnnotatedSeries out;
    out.series.name = to_string(spec.family);
    out.series.values.resize(spec.n);
    out.d1.resize(spec.n);
    out.d2.resize(spec.n);
    out.d3.resize(spec.n);

    for (std::size_t i = 0; i < spec.n; ++i) {
        const double t = double(i) * spec.delta_t;
        double x, d1, d2, d3;
        switch (spec.family) {
        case SyntheticSpec::Family::Ramp:
            x = spec.x0 + spec.slope * t;
            d1 = spec.slope;
            d2 = 0.0;
            d3 = 0.0;
            break;
        case SyntheticSpec::Family::Sine: {
            const double a = spec.amplitude;
            const double w = spec.omega;
            x = a * std::sin(w * t);
            d1 = a * w * std::cos(w * t);
            d2 = -a * w * w * std::sin(w * t);
            d3 = -a * w * w * w * std::cos(w * t);
            break;
        }
        case SyntheticSpec::Family::Exponential: {
            x = spec.x0 * std::exp(spec.rate * t);
            d1 = spec.rate * x;
            d2 = spec.rate * d1;
            d3 = spec.rate * d2;
            break;
        }
        case SyntheticSpec::Family::Logistic: {
            const double k = spec.capacity;
            const double r = spec.rate;
            const double a = (k - spec.x0) / spec.x0;
            x = k / (1.0 + a * std::exp(-r * t));
            d1 = r * x * (1.0 - x / k);
            d2 = r * d1 * (1.0 - 2.0 * x / k);
            d3 = r * d2 * (1.0 - 2.0 * x / k) - 2.0 * r * d1 * d1 / k;
            break;
        }
        default:
            throw ConfigError("synthetic spec: unknown family");
        }
        out.series.values[i] = x;
        out.d1[i] = d1;
        out.d2[i] = d2;
        out.d3[i] = d3;
    }

    if (spec.noise_sigma > 0.0) {
        Rng rng(spec.seed);
        for (double& x : out.series.values) x += spec.noise_sigma * rng.gaussian();
    }
    return out;
}

HeadProbe make_head_probe(const Params& params, const ModelSpec& spec) {
    const int orders = taylor_order(spec.kind);
    if (orders < 1) {
        throw ConfigError(std::string("head probe: model kind '") + to_string(spec.kind) +
                          "' has no derivative heads");
    }
    const auto* mlp = std::get_if<MlpParams>(&params);
    if (mlp == nullptr) throw ShapeError("head probe: parameters are not MLP weights");
    const MlpParams weights = *mlp;
    const std::size_t d = spec.input_len;
    const bool recursive = is_recursive(spec.kind);
    return [weights, orders, d, recursive](std::size_t, std::span<const double> window) {
        const Vector out = mlp_forward(weights, window);
        Vector est(orders);
        for (int k = 0; k < orders; ++k) {
            est[k] = recursive ? out[std::size_t(k) * d + d - 1] : out[k];
        }
        return est;
    };
}

namespace {

bool nearly_constant(const Vector& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double span = *hi - *lo;
    return span <= 1e-12 * std::max({1.0, std::abs(*lo), std::abs(*hi)});
}

} // namespace

ProbeReport derivative_probe(const HeadProbe& probe, const WindowSet& windows,
                             const std::vector<Vector>& truth) {
    if (truth.empty()) throw InputError("derivative_probe: no truth annotations");
    if (windows.count() == 0) throw InputError("derivative_probe: empty window set");
    const int orders = static_cast<int>(truth.size());
    for (const Vector& t : truth) {
        if (t.size() != windows.count()) {
            throw ShapeError("derivative_probe: truth length does not match window count");
        }
    }

    std::vector<Vector> estimates(orders, Vector(windows.count()));
    for (std::size_t i = 0; i < windows.count(); ++i) {
        const Vector est = probe(i, windows.window(i));
        if (est.size() < std::size_t(orders)) {
            throw ShapeError("derivative_probe: probe returned " + std::to_string(est.size()) +
                             " orders, need " + std::to_string(orders));
        }
        for (int k = 0; k < orders; ++k) estimates[k][i] = est[k];
    }

    ProbeReport report;
    report.sample_count = windows.count();
    const double n = double(windows.count());
    for (int k = 0; k < orders; ++k) {
        ProbeOrderStats stats;
        stats.order = k + 1;

        double sq = 0.0;
        for (std::size_t i = 0; i < windows.count(); ++i) {
            const double d = estimates[k][i] - truth[k][i];
            sq += d * d;
        }
        stats.rmse = std::sqrt(sq / n);

        const bool const_est = nearly_constant(estimates[k]);
        const bool const_truth = nearly_constant(truth[k]);
        if (const_est && const_truth) {
            stats.note = "undefined (both constant)";
        } else if (const_est) {
            stats.note = "undefined (head constant)";
        } else if (const_truth) {
            stats.note = "undefined (truth constant)";
        } else {
            double mean_e = 0.0, mean_t = 0.0;
            for (std::size_t i = 0; i < windows.count(); ++i) {
                mean_e += estimates[k][i];
                mean_t += truth[k][i];
            }
            mean_e /= n;
            mean_t /= n;
            double cov = 0.0, var_e = 0.0, var_t = 0.0;
            for (std::size_t i = 0; i < windows.count(); ++i) {
                const double de = estimates[k][i] - mean_e;
                const double dt = truth[k][i] - mean_t;
                cov += de * dt;
                var_e += de * de;
                var_t += dt * dt;
            }
            stats.correlation_defined = true;
            stats.correlation = cov / std::sqrt(var_e * var_t);
        }
        report.orders.push_back(std::move(stats));
    }
    return report;
}

std::vector<Vector> truth_at_window_ends(const AnnotatedSeries& series,
                                         std::size_t segment_offset, std::size_t input_len,
                                         std::size_t window_count, int orders,
                                         double value_scale) {
    if (orders < 1 || orders > 3) throw ConfigError("truth_at_window_ends: orders must be 1..3");
    const Vector* annotations[3] = {&series.d1, &series.d2, &series.d3};
    std::vector<Vector> truth(orders, Vector(window_count));
    for (std::size_t i = 0; i < window_count; ++i) {
        const std::size_t end_index = segment_offset + i + input_len - 1;
        if (end_index >= series.series.length()) {
            throw ShapeError("truth_at_window_ends: window extends past annotations");
        }
        for (int k = 0; k < orders; ++k) {
            truth[k][i] = (*annotations[k])[end_index] * value_scale;
        }
    }
    return truth;
}

ProbeRunResult run_probe(const ProbeManifest& manifest) {
    manifest.model.validate();
    const AnnotatedSeries annotated = generate(manifest.synthetic);
    const auto segments = split_series(annotated.series, manifest.split);

    const ScalingParams scaler = fit_scaler(segments[0]);
    const Vector train_values = apply_scaler(scaler, segments[0].values);
    const Vector val_values = apply_scaler(scaler, segments[1].values);
    const Vector test_values = apply_scaler(scaler, segments[2].values);

    const WindowSet train_ws = make_windows(train_values, manifest.model.input_len);
    const WindowSet val_ws = make_windows(val_values, manifest.model.input_len);
    const WindowSet test_ws = make_windows(test_values, manifest.model.input_len);

    ProbeRunResult result;
    result.training = train_model(manifest.model, train_ws, val_ws, manifest.training, &test_ws);
    result.probed_orders = taylor_order(manifest.model.kind);

    const std::size_t test_offset = segments[0].length() + segments[1].length();
    const double value_scale =
        scaler.degenerate ? 1.0 : 1.0 / (scaler.max_val - scaler.min_val);
    const std::vector<Vector> truth =
        truth_at_window_ends(annotated, test_offset, manifest.model.input_len, test_ws.count(),
                             result.probed_orders, value_scale);

    const HeadProbe probe = make_head_probe(result.training.best_params, manifest.model);
    result.report = derivative_probe(probe, test_ws, truth);
    return result;
}

ProbeManifest parse_probe_manifest(const std::string& path) {
    const KvDoc doc = KvDoc::parse_file(path);
    doc.require_known_keys({"family", "slope", "x0", "amplitude", "omega", "rate", "capacity",
                            "n", "delta_t", "noise_sigma", "generator_seed", "model",
                            "learning_rate", "input_len", "hidden_size", "substeps", "seed",
                            "max_epochs", "patience", "batch_size", "train_frac", "val_frac",
                            "test_frac", "output_dir"});
    ProbeManifest mf;
    const std::string family = doc.get("family", "sine");
    const auto fam = family_from_string(family);
    if (!fam) throw ConfigError(path + ": unknown family '" + family + "'");
    mf.synthetic.family = *fam;
    mf.synthetic.slope = doc.get_double("slope", mf.synthetic.slope);
    mf.synthetic.x0 = doc.get_double("x0", mf.synthetic.x0);
    mf.synthetic.amplitude = doc.get_double("amplitude", mf.synthetic.amplitude);
    mf.synthetic.omega = doc.get_double("omega", mf.synthetic.omega);
    mf.synthetic.rate = doc.get_double("rate", mf.synthetic.rate);
    mf.synthetic.capacity = doc.get_double("capacity", mf.synthetic.capacity);
    mf.synthetic.n = std::size_t(doc.get_long("n", long(mf.synthetic.n)));
    mf.synthetic.delta_t = doc.get_double("delta_t", mf.synthetic.delta_t);
    mf.synthetic.noise_sigma = doc.get_double("noise_sigma", mf.synthetic.noise_sigma);
    mf.synthetic.seed = std::uint64_t(doc.get_long("generator_seed", 0));

    const std::string model = doc.get("model", "taylor2");
    const auto kind = model_kind_from_string(model);
    if (!kind) throw ConfigError(path + ": unknown model '" + model + "'");
    mf.model.kind = *kind;
    mf.model.input_len = std::size_t(doc.get_long("input_len", long(mf.model.input_len)));
    mf.model.hidden_size = std::size_t(doc.get_long("hidden_size", long(mf.model.hidden_size)));
    mf.model.delta_t = mf.synthetic.delta_t;
    mf.model.substeps = int(doc.get_long("substeps", is_recursive(*kind) ? 2 : 1));

    mf.training.learning_rate = doc.get_double("learning_rate", mf.training.learning_rate);
    mf.training.seed = std::uint64_t(doc.get_long("seed", 0));
    mf.training.max_epochs = int(doc.get_long("max_epochs", mf.training.max_epochs));
    mf.training.patience = int(doc.get_long("patience", mf.training.patience));
    mf.training.batch_size = std::size_t(doc.get_long("batch_size", long(mf.training.batch_size)));

    mf.split.train_frac = doc.get_double("train_frac", mf.split.train_frac);
    mf.split.val_frac = doc.get_double("val_frac", mf.split.val_frac);
    mf.split.test_frac = doc.get_double("test_frac", mf.split.test_frac);
    mf.output_dir = doc.get("output_dir", mf.output_dir);
    return mf;
}

void write_probe_report(const ProbeRunResult& result, const std::string& output_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + output_dir + ": " + ec.message());

    const std::string path = output_dir + "/probe_report.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw IoError("cannot write " + path);

    auto fmt = [](double v) {
        char buf[64];
        const auto [p, unused] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, p);
    };
    out << "order,rmse,correlation,note,samples\n";
    for (const ProbeOrderStats& s : result.report.orders) {
        out << s.order << ',' << fmt(s.rmse) << ','
            << (s.correlation_defined ? fmt(s.correlation) : std::string()) << ',' << s.note
            << ',' << result.report.sample_count << '\n';
    }
    if (!out.good()) throw IoError("failed while writing " + path);
}

} // namespace taycast
