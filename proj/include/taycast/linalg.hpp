#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace taycast {

using Vector = std::vector<double>;

// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return rows * cols; }
};

// Flat kernels shared by the tape forward pass and the plain (untaped)
// model evaluations, so both paths produce bitwise-identical values.
namespace kernel {

// out = W x, with W given flat row-major (rows x cols).
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out);

void add(std::span<const double> a, std::span<const double> b, std::span<double> out);

double sigmoid(double x);
void sigmoid(std::span<const double> in, std::span<double> out);
void tanh(std::span<const double> in, std::span<double> out);

} // namespace kernel

bool all_finite(std::span<const double> v);

} // namespace taycast
