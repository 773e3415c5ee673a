#include "taycast/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "taycast/errors.hpp"
#include "taycast/rng.hpp"

namespace taycast {

std::vector<std::span<double>> MlpParams::spans() {
    return {std::span<double>(w1.data), std::span<double>(b1), std::span<double>(w2.data),
            std::span<double>(b2)};
}

std::vector<std::span<const double>> MlpParams::spans() const {
    return {std::span<const double>(w1.data), std::span<const double>(b1),
            std::span<const double>(w2.data), std::span<const double>(b2)};
}

MlpParams init_mlp(std::uint64_t seed, std::size_t input_len, std::size_t hidden_size,
                   std::size_t output_len) {
    if (input_len < 1 || hidden_size < 1 || output_len < 1) {
        throw ConfigError("init_mlp: all dimensions must be >= 1");
    }
    MlpParams p;
    p.w1 = Matrix(hidden_size, input_len);
    p.b1 = Vector(hidden_size, 0.0);
    p.w2 = Matrix(output_len, hidden_size);
    p.b2 = Vector(output_len, 0.0);

    Rng rng(seed);
    const double bound1 = std::sqrt(6.0 / double(input_len + hidden_size));
    for (double& w : p.w1.data) w = rng.uniform(-bound1, bound1);
    const double bound2 = std::sqrt(6.0 / double(hidden_size + output_len));
    for (double& w : p.w2.data) w = rng.uniform(-bound2, bound2);
    return p;
}

Vector mlp_forward(const MlpParams& params, std::span<const double> input) {
    if (input.size() != params.w1.cols) {
        throw ShapeError("mlp_forward: input length " + std::to_string(input.size()) +
                         " does not match weight columns " + std::to_string(params.w1.cols));
    }
    if (!all_finite(input)) throw InputError("mlp_forward: non-finite input");

    Vector hidden(params.hidden_size());
    kernel::matvec(params.w1.data, params.w1.rows, params.w1.cols, input, hidden);
    kernel::add(hidden, params.b1, hidden);
    kernel::sigmoid(hidden, hidden);

    Vector out(params.output_len());
    kernel::matvec(params.w2.data, params.w2.rows, params.w2.cols, hidden, out);
    kernel::add(out, params.b2, out);
    return out;
}

MlpLeaves tape_mlp(Tape& tape, const MlpParams& params) {
    MlpLeaves leaves;
    leaves.w1 = tape.parameter(params.w1);
    leaves.b1 = tape.parameter(params.b1);
    leaves.w2 = tape.parameter(params.w2);
    leaves.b2 = tape.parameter(params.b2);
    return leaves;
}

NodeId mlp_forward(Tape& tape, const MlpLeaves& leaves, NodeId input) {
    NodeId hidden = tape.sigmoid(tape.add(tape.matvec(leaves.w1, input), leaves.b1));
    return tape.add(tape.matvec(leaves.w2, hidden), leaves.b2);
}

void zero_heads(MlpParams& params) {
    std::fill(params.w2.data.begin(), params.w2.data.end(), 0.0);
    std::fill(params.b2.begin(), params.b2.end(), 0.0);
}

} // namespace taycast
