#pragma once

#include <array>
#include <span>
#include <string>

#include "taycast/linalg.hpp"

namespace taycast {

// A univariate series sampled at a unit interval.
struct TimeSeries {
    std::string name;
    Vector values;

    std::size_t length() const { return values.size(); }
};

// Min-max normalization fitted on training data. A spread below 1e-12
// marks the scaler degenerate: apply() maps everything to 0.5 and
// invert() returns min_val.
struct ScalingParams {
    double min_val = 0.0;
    double max_val = 1.0;
    bool degenerate = false;
};

// Supervised pairs: inputs[i] = values[i .. i+input_len), targets[i] =
// values[i + input_len]; count = n - input_len.
struct WindowSet {
    Matrix inputs; // count x input_len
    Vector targets;
    std::size_t input_len = 0;

    std::size_t count() const { return inputs.rows; }
    std::span<const double> window(std::size_t i) const {
        return {inputs.data.data() + i * input_len, input_len};
    }
};

// Chronological split fractions; each must be positive and they must sum
// to 1.
struct SplitSpec {
    double train_frac = 0.7;
    double val_frac = 0.15;
    double test_frac = 0.15;

    void validate() const; // throws ConfigError
};

// Reads one numeric column from a delimited text file (comma or
// whitespace separated). `column` is a 0-based index, or a header name
// when has_header is set. Parse errors report the offending row.
TimeSeries load_series(const std::string& path, const std::string& column, bool has_header);

// Contiguous chronological segments with boundaries at
// floor(n * train_frac) and floor(n * (train_frac + val_frac)).
std::array<TimeSeries, 3> split_series(const TimeSeries& series, const SplitSpec& spec);

ScalingParams fit_scaler(const TimeSeries& train);
Vector apply_scaler(const ScalingParams& params, std::span<const double> values);
Vector invert_scaler(const ScalingParams& params, std::span<const double> values);

WindowSet make_windows(std::span<const double> values, std::size_t input_len);

} // namespace taycast
