#pragma once

#include <span>
#include <vector>

#include "taycast/linalg.hpp"

namespace taycast {

// One gradient block per parameter block, shape-congruent with the
// parameter spans they differentiate.
using Gradients = std::vector<Vector>;

// Moment estimates for Adam, one block per parameter block.
struct AdamState {
    std::vector<Vector> first_moment;
    std::vector<Vector> second_moment;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

AdamState make_adam_state(std::span<const std::span<double>> params);

// Standard Adam update with bias correction. Moments are initialized to
// zero on first use; step_count increments by one per call. Deterministic.
// Throws ShapeError if blocks do not match and ConfigError if lr <= 0.
void adam_step(std::span<std::span<double>> params, const Gradients& grads, AdamState& state,
               double lr);

} // namespace taycast
