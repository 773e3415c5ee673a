#include "taycast/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "taycast/errors.hpp"
#include "taycast/rng.hpp"

namespace taycast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinImprovement = 1e-12;
// Offset separating the shuffle stream from the init stream of one seed.
constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ull;

} // namespace

double evaluate(const Params& params, const ModelSpec& spec, const WindowSet& windows) {
    if (windows.count() == 0) throw InputError("evaluate: empty window set");
    if (windows.input_len != spec.input_len) {
        throw ShapeError("evaluate: window length " + std::to_string(windows.input_len) +
                         " does not match spec input length " + std::to_string(spec.input_len));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < windows.count(); ++i) {
        double pred;
        try {
            pred = predict(params, spec, windows.window(i));
        } catch (const DivergenceError&) {
            return kInf;
        }
        const double d = pred - windows.targets[i];
        acc += d * d;
    }
    return acc / double(windows.count());
}

TrainReport train_model(const ModelSpec& spec, const WindowSet& train, const WindowSet& val,
                        const TrainConfig& config, const WindowSet* test) {
    spec.validate();
    if (config.learning_rate <= 0.0) throw ConfigError("train: learning rate must be positive");
    if (config.batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    if (config.max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
    if (config.patience < 1) throw ConfigError("train: patience must be >= 1");
    if (train.input_len != spec.input_len || val.input_len != spec.input_len) {
        throw ShapeError("train: window length does not match spec input length");
    }
    if (train.count() == 0) throw InputError("train: empty training set");
    if (val.count() == 0) throw InputError("train: empty validation set");

    Params params = init_params(spec, config.seed);
    AdamState adam;
    {
        auto spans = param_spans(params);
        adam = make_adam_state(std::span<const std::span<double>>(spans));
    }
    Rng shuffle_rng(config.seed + kShuffleStream);

    TrainReport report;
    report.best_params = params;
    report.best_val_mse = kInf;
    report.test_mse = std::numeric_limits<double>::quiet_NaN();

    std::vector<std::size_t> order(train.count());
    std::iota(order.begin(), order.end(), 0);

    Tape tape;
    std::vector<NodeId> preds;
    int epochs_without_improvement = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        bool batch_diverged = false;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            tape.reset();
            TapedModel model = tape_model(tape, params);
            preds.clear();
            Vector targets;
            targets.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                preds.push_back(predict_node(tape, model, spec, train.window(order[k])));
                targets.push_back(train.targets[order[k]]);
            }
            NodeId loss = tape.scale(
                tape.squared_error(tape.concat(preds), tape.constant(targets)),
                1.0 / double(stop - start));
            if (!std::isfinite(tape.scalar(loss))) {
                batch_diverged = true;
                break;
            }
            tape.backward(loss);
            Gradients grads = collect_gradients(tape, model);
            auto spans = param_spans(params);
            adam_step(std::span<std::span<double>>(spans), grads, adam, config.learning_rate);
        }

        report.epochs_run = epoch;
        if (batch_diverged) {
            report.diverged = true;
            break;
        }

        const double train_mse = evaluate(params, spec, train);
        const double val_mse = evaluate(params, spec, val);
        report.loss_curve.emplace_back(train_mse, val_mse);
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) {
            report.diverged = true;
            break;
        }

        if (report.best_val_mse - val_mse >= kMinImprovement) {
            report.best_val_mse = val_mse;
            report.best_params = params;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
            if (epochs_without_improvement >= config.patience) break;
        }
    }

    if (report.diverged || !std::isfinite(report.best_val_mse)) {
        report.diverged = true;
        report.best_val_mse = kInf;
        report.train_mse = kInf;
        if (test != nullptr) report.test_mse = kInf;
        return report;
    }

    report.train_mse = evaluate(report.best_params, spec, train);
    if (test != nullptr) report.test_mse = evaluate(report.best_params, spec, *test);
    return report;
}

} // namespace taycast
