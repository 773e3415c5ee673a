#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "taycast/data.hpp"
#include "taycast/model.hpp"
#include "taycast/train.hpp"

namespace taycast {

// Synthetic series with closed-form derivatives at sigma = 0.
struct SyntheticSpec {
    enum class Family { Ramp, Sine, Exponential, Logistic };

    Family family = Family::Sine;
    // ramp: x0 + slope*t; sine: amplitude*sin(omega*t);
    // exponential: x0*exp(rate*t); logistic: rate r, capacity K, initial x0.
    double slope = 1.0;
    double x0 = 0.0;
    double amplitude = 1.0;
    double omega = 1.0;
    double rate = 1.0;
    double capacity = 1.0;

    std::size_t n = 100;
    double delta_t = 1.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const; // throws ConfigError
};

const char* to_string(SyntheticSpec::Family family);
std::optional<SyntheticSpec::Family> family_from_string(std::string_view name);

// Sampled values (with optional seeded Gaussian noise) plus the
// noise-free analytic derivatives f', f'', f''' at each sample.
struct AnnotatedSeries {
    TimeSeries series;
    Vector d1, d2, d3;
};

AnnotatedSeries generate(const SyntheticSpec& spec);

// Per-order derivative estimates at a window's final timestamp; takes the
// window index alongside its values so analytic oracles can look up the
// exact truth.
using HeadProbe = std::function<Vector(std::size_t index, std::span<const double> window)>;

// Head k of the network evaluated on the window; for recursive kinds the
// component of head block k that belongs to the last window element.
HeadProbe make_head_probe(const Params& params, const ModelSpec& spec);

struct ProbeOrderStats {
    int order = 0;
    double rmse = 0.0;
    bool correlation_defined = false;
    double correlation = 0.0;
    std::string note; // names the constant side when correlation is undefined
};

// Diagnostic comparison of head outputs against analytic derivatives; no
// pass/fail is embedded because head semantics are not guaranteed.
struct ProbeReport {
    std::vector<ProbeOrderStats> orders;
    std::size_t sample_count = 0;
};

// truth[k][i] is the order-(k+1) derivative at window i's final timestamp.
ProbeReport derivative_probe(const HeadProbe& probe, const WindowSet& windows,
                             const std::vector<Vector>& truth);

// Analytic derivatives at each window's final timestamp for windows built
// from the annotated series starting at segment_offset, scaled by
// value_scale (the scaler's 1/range when probing in normalized units).
std::vector<Vector> truth_at_window_ends(const AnnotatedSeries& series,
                                         std::size_t segment_offset, std::size_t input_len,
                                         std::size_t window_count, int orders,
                                         double value_scale);

// One self-contained probe run: generate, split, normalize, train, probe
// on the test windows.
struct ProbeManifest {
    SyntheticSpec synthetic;
    ModelSpec model;
    TrainConfig training;
    SplitSpec split;
    std::string output_dir = "out";
};

struct ProbeRunResult {
    ProbeReport report;
    TrainReport training;
    int probed_orders = 0;
};

ProbeRunResult run_probe(const ProbeManifest& manifest);

ProbeManifest parse_probe_manifest(const std::string& path);
void write_probe_report(const ProbeRunResult& result, const std::string& output_dir);

} // namespace taycast
