#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "taycast/data.hpp"
#include "taycast/model.hpp"

namespace taycast {

struct TrainConfig {
    double learning_rate = 0.01;
    std::uint64_t seed = 0; // initialization seed; the shuffle stream is derived from it
    int max_epochs = 2000;
    int patience = 50;
    std::size_t batch_size = 32;
};

struct TrainReport {
    Params best_params;
    double best_val_mse = 0.0;
    double train_mse = 0.0; // at best params
    double test_mse = 0.0;  // at best params; NaN when no test set was given
    int epochs_run = 0;
    bool diverged = false;
    std::vector<std::pair<double, double>> loss_curve; // per-epoch (train_mse, val_mse)
};

// Minimizes MSE over the training windows with Adam on seeded shuffled
// mini-batches. Validation MSE is tracked each epoch; training stops when
// it fails to improve by at least 1e-12 for `patience` consecutive epochs
// or at max_epochs, and the best-validation parameters are restored.
// A non-finite loss aborts the run with infinity recorded as its error so
// grid aggregation can proceed. Deterministic given (spec, data, config).
TrainReport train_model(const ModelSpec& spec, const WindowSet& train, const WindowSet& val,
                        const TrainConfig& config, const WindowSet* test = nullptr);

// Mean squared prediction error over a window set.
double evaluate(const Params& params, const ModelSpec& spec, const WindowSet& windows);

} // namespace taycast
