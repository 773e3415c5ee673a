#include "taycast/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "taycast/errors.hpp"

namespace taycast {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    if (line.find(',') != std::string::npos) {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    } else {
        std::stringstream ss(line);
        std::string field;
        while (ss >> field) fields.push_back(field);
    }
    return fields;
}

bool parse_index(const std::string& s, std::size_t& out) {
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && p == end;
}

} // namespace

TimeSeries load_series(const std::string& path, const std::string& column, bool has_header) {
    std::ifstream file(path);
    if (!file.is_open()) throw IoError("cannot open file: " + path);

    TimeSeries series;
    series.name = path;

    std::size_t column_index = 0;
    bool column_resolved = false;
    if (!has_header) {
        if (!parse_index(column, column_index)) {
            throw ConfigError("column '" + column + "' must be a numeric index when the file has no header");
        }
        column_resolved = true;
    }

    std::string line;
    std::size_t row = 0;
    bool header_pending = has_header;
    while (std::getline(file, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (header_pending) {
            header_pending = false;
            if (parse_index(column, column_index)) {
                column_resolved = true;
            } else {
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    if (fields[i] == column) {
                        column_index = i;
                        column_resolved = true;
                        break;
                    }
                }
                if (!column_resolved) {
                    throw ConfigError("column '" + column + "' not found in header of " + path);
                }
            }
            continue;
        }
        if (column_index >= fields.size()) {
            throw ParseError(path + ": row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, column " +
                             std::to_string(column_index) + " requested");
        }
        const std::string& cell = fields[column_index];
        try {
            std::size_t consumed = 0;
            const double v = std::stod(cell, &consumed);
            if (consumed != cell.size()) {
                throw ParseError(path + ": non-numeric value '" + cell + "' at row " +
                                 std::to_string(row));
            }
            if (!std::isfinite(v)) {
                throw ParseError(path + ": non-finite value '" + cell + "' at row " +
                                 std::to_string(row));
            }
            series.values.push_back(v);
        } catch (const std::invalid_argument&) {
            throw ParseError(path + ": non-numeric value '" + cell + "' at row " +
                             std::to_string(row));
        } catch (const std::out_of_range&) {
            throw ParseError(path + ": value out of range '" + cell + "' at row " +
                             std::to_string(row));
        }
    }
    if (series.values.size() < 2) {
        throw InsufficientDataError(path + ": series has " +
                                    std::to_string(series.values.size()) +
                                    " values, need at least 2");
    }
    return series;
}

void SplitSpec::validate() const {
    if (!(train_frac > 0.0) || !(val_frac > 0.0) || !(test_frac > 0.0)) {
        throw ConfigError("split fractions must all be positive");
    }
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
        throw ConfigError("split fractions must sum to 1");
    }
}

std::array<TimeSeries, 3> split_series(const TimeSeries& series, const SplitSpec& spec) {
    spec.validate();
    const std::size_t n = series.values.size();
    const std::size_t a = static_cast<std::size_t>(std::floor(double(n) * spec.train_frac));
    const std::size_t b =
        static_cast<std::size_t>(std::floor(double(n) * (spec.train_frac + spec.val_frac)));
    if (a == 0 || b <= a || b >= n) {
        throw ConfigError("split of " + std::to_string(n) +
                          " values leaves an empty segment (boundaries " + std::to_string(a) +
                          ", " + std::to_string(b) + ")");
    }
    auto piece = [&](std::size_t lo, std::size_t hi, const char* tag) {
        TimeSeries out;
        out.name = series.name + "/" + tag;
        out.values.assign(series.values.begin() + lo, series.values.begin() + hi);
        return out;
    };
    return {piece(0, a, "train"), piece(a, b, "val"), piece(b, n, "test")};
}

ScalingParams fit_scaler(const TimeSeries& train) {
    if (train.values.empty()) throw InputError("fit_scaler: empty training series");
    ScalingParams p;
    p.min_val = *std::min_element(train.values.begin(), train.values.end());
    p.max_val = *std::max_element(train.values.begin(), train.values.end());
    p.degenerate = (p.max_val - p.min_val) < 1e-12;
    return p;
}

Vector apply_scaler(const ScalingParams& params, std::span<const double> values) {
    Vector out(values.size());
    if (params.degenerate) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double range = params.max_val - params.min_val;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - params.min_val) / range;
    return out;
}

Vector invert_scaler(const ScalingParams& params, std::span<const double> values) {
    Vector out(values.size());
    if (params.degenerate) {
        std::fill(out.begin(), out.end(), params.min_val);
        return out;
    }
    const double range = params.max_val - params.min_val;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = params.min_val + values[i] * range;
    return out;
}

WindowSet make_windows(std::span<const double> values, std::size_t input_len) {
    if (input_len < 1) throw ConfigError("make_windows: input_len must be >= 1");
    if (values.size() <= input_len) {
        throw InsufficientDataError("make_windows: series of length " +
                                    std::to_string(values.size()) +
                                    " cannot produce windows of length " +
                                    std::to_string(input_len));
    }
    WindowSet ws;
    ws.input_len = input_len;
    const std::size_t count = values.size() - input_len;
    ws.inputs = Matrix(count, input_len);
    ws.targets.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < input_len; ++j) ws.inputs(i, j) = values[i + j];
        ws.targets[i] = values[i + input_len];
    }
    return ws;
}

} // namespace taycast
