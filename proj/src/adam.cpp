#include "taycast/adam.hpp"

#include <cmath>
#include <string>

#include "taycast/errors.hpp"

namespace taycast {

AdamState make_adam_state(std::span<const std::span<double>> params) {
    AdamState state;
    for (const auto& block : params) {
        state.first_moment.emplace_back(block.size(), 0.0);
        state.second_moment.emplace_back(block.size(), 0.0);
    }
    return state;
}

void adam_step(std::span<std::span<double>> params, const Gradients& grads, AdamState& state,
               double lr) {
    if (lr <= 0.0) throw ConfigError("adam_step: learning rate must be positive");
    if (grads.size() != params.size()) {
        throw ShapeError("adam_step: " + std::to_string(grads.size()) + " gradient blocks for " +
                         std::to_string(params.size()) + " parameter blocks");
    }
    if (state.first_moment.empty()) {
        for (const auto& block : params) {
            state.first_moment.emplace_back(block.size(), 0.0);
            state.second_moment.emplace_back(block.size(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw ShapeError("adam_step: optimizer state does not match parameter blocks");
    }

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, double(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, double(state.step_count));

    for (std::size_t b = 0; b < params.size(); ++b) {
        auto& p = params[b];
        const auto& g = grads[b];
        auto& m = state.first_moment[b];
        auto& v = state.second_moment[b];
        if (g.size() != p.size() || m.size() != p.size()) {
            throw ShapeError("adam_step: block " + std::to_string(b) + " shape mismatch");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

} // namespace taycast
