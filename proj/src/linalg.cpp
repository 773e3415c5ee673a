#include "taycast/linalg.hpp"

#include <cmath>

namespace taycast {

namespace kernel {

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void sigmoid(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = sigmoid(in[i]);
}

void tanh(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
}

} // namespace kernel

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

} // namespace taycast
