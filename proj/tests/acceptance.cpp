// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit on
// any failure. Each criterion is self-contained and uses fixed seeds.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

#include "gradcheck.hpp"
#include "table2.hpp"
#include "taycast/bench.hpp"
#include "taycast/errors.hpp"
#include "taycast/rng.hpp"
#include "taycast/synth.hpp"
#include "taycast/train.hpp"

using namespace taycast;

namespace {

namespace fs = std::filesystem;

struct Check {
    std::vector<std::string> failures;

    void expect(bool condition, const std::string& what) {
        if (!condition) failures.push_back(what);
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string g_workdir;

std::string workdir() {
    if (g_workdir.empty()) {
        g_workdir = (fs::temp_directory_path() /
                     ("taycast_acceptance_" + std::to_string(::getpid())))
                        .string();
        fs::create_directories(g_workdir);
    }
    return g_workdir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TAYCAST_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

// ---- criterion 1: gradient oracle --------------------------------------

void criterion_gradient_oracle(Check& check) {
    Rng rng(1001);
    for (ModelKind kind : kAllModelKinds) {
        ModelSpec spec;
        spec.kind = kind;
        spec.input_len = 4;
        spec.hidden_size = 5;
        spec.substeps = is_recursive(kind) ? 4 : 1;

        double worst = 0.0;
        for (int draw = 0; draw < 20; ++draw) {
            Params params = init_params(spec, std::uint64_t(draw));
            testutil::randomize_params(params, rng, 0.6);
            const WindowSet ws = testutil::random_windows(rng, 5, spec.input_len);

            const Gradients grads = testutil::mse_gradients(params, spec, ws);
            const auto result = testutil::finite_difference_check(
                params, grads,
                [&](const Params& p) { return testutil::mse_loss(p, spec, ws); });
            worst = std::max(worst, result.max_rel_err);
        }
        check.expect(worst <= 1e-4, std::string(to_string(kind)) +
                                        ": max relative error " + std::to_string(worst));
    }
}

// ---- criterion 2: recursion algebra -------------------------------------

void criterion_recursion_algebra(Check& check) {
    DerivativeField identity = [](std::span<const double> s) {
        return std::vector<Vector>{Vector(s.begin(), s.end())};
    };
    const Vector window = {1.0, -0.4, 2.5};
    const double dt = 1.0;
    for (int m : {1, 2, 4, 8}) {
        const Vector out = recursive_rollout(identity, window, dt, m, 1);
        const double factor = std::pow(1.0 + dt / m, m);
        for (std::size_t i = 0; i < window.size(); ++i) {
            check.expect(std::abs(out[i] - window[i] * factor) <= 1e-12,
                         "identity field, m=" + std::to_string(m) + ", element " +
                             std::to_string(i));
        }
    }

    const double c = -0.3125;
    DerivativeField constant = [c](std::span<const double> s) {
        return std::vector<Vector>{Vector(s.size(), c)};
    };
    const Vector base = recursive_rollout(constant, window, dt, 1, 1);
    for (int m = 2; m <= 8; ++m) {
        const Vector out = recursive_rollout(constant, window, dt, m, 1);
        for (std::size_t i = 0; i < window.size(); ++i) {
            check.expect(std::abs(out[i] - base[i]) <= 1e-12,
                         "constant field not m-invariant at m=" + std::to_string(m));
        }
    }
}

// ---- criterion 3: persistence invariant ----------------------------------

void criterion_persistence(Check& check) {
    Rng rng(3003);
    for (ModelKind kind : {ModelKind::Residual, ModelKind::Taylor1, ModelKind::Taylor2,
                           ModelKind::Taylor3, ModelKind::RecursiveResidual,
                           ModelKind::RecursiveTaylor2, ModelKind::RecursiveTaylor3}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.input_len = 7;
        spec.hidden_size = 16;
        spec.substeps = is_recursive(kind) ? 4 : 1;

        Params params = init_params(spec, 11);
        zero_heads(params);
        for (int trial = 0; trial < 100; ++trial) {
            Vector window(spec.input_len);
            for (double& v : window) v = rng.uniform(-5.0, 5.0);
            const double pred = predict(params, spec, window);
            if (pred != window.back()) {
                check.expect(false, std::string(to_string(kind)) + ": trial " +
                                        std::to_string(trial) + " predicted " +
                                        std::to_string(pred) + " instead of last element");
                break;
            }
        }
    }
}

// ---- criterion 4: aggregation oracle -------------------------------------

void criterion_aggregation_oracle(Check& check) {
    std::vector<RunRecord> records;
    for (const auto& row : testutil::kTable2) {
        for (std::size_t m = 0; m < testutil::kTable2Models; ++m) {
            RunRecord rec;
            rec.dataset = row.dataset;
            rec.model = *model_kind_from_string(testutil::kTable2ModelNames[m]);
            rec.learning_rate = 0.01;
            rec.input_len = 5;
            rec.epochs_run = 1;
            rec.train_mse = row.best[m];
            rec.val_mse = row.best[m];
            rec.test_mse = row.best[m];
            records.push_back(std::move(rec));
        }
    }

    // Through the same CSV + aggregation path the CLI uses.
    const std::string dir = workdir() + "/aggregation";
    fs::create_directories(dir);
    write_records_csv(records, dir + "/table_cells.csv");
    const std::vector<RunRecord> loaded = read_records_csv(dir + "/table_cells.csv");
    const AggregateReport report = aggregate(loaded);

    check.expect(report.table.models.size() == testutil::kTable2Models, "model column count");
    for (std::size_t m = 0; m < testutil::kTable2Models; ++m) {
        check.expect(std::abs(report.avg_rank[m] - testutil::kTable2AvgRank[m]) <= 0.2,
                     std::string("average rank of ") + testutil::kTable2ModelNames[m] + ": " +
                         std::to_string(report.avg_rank[m]) + " vs published " +
                         std::to_string(testutil::kTable2AvgRank[m]));
        check.expect(std::abs(report.median_pct_dev[m] - testutil::kTable2MedianDev[m]) <= 0.5,
                     std::string("median deviation of ") + testutil::kTable2ModelNames[m] + ": " +
                         std::to_string(report.median_pct_dev[m]) + " vs published " +
                         std::to_string(testutil::kTable2MedianDev[m]));
    }
    for (std::size_t d = 0; d < testutil::kTable2Datasets; ++d) {
        const auto& winners = report.winners[d];
        const bool found = std::find(winners.begin(), winners.end(),
                                     testutil::kTable2[d].winner) != winners.end();
        check.expect(found, std::string("winner mismatch on ") + testutil::kTable2[d].dataset);
    }

    // The aggregate CLI subcommand completes on the same file.
    const int rc = run_cli("aggregate " + dir + "/table_cells.csv --output " + dir + "/out");
    check.expect(rc == 0, "aggregate subcommand exited with " + std::to_string(rc));
    check.expect(fs::exists(dir + "/out/summary.md"), "aggregate did not write summary.md");
}

// ---- criterion 5: end-to-end desk benchmark ------------------------------

void criterion_desk_benchmark(Check& check) {
    // Noise-free sine, about 50 samples per period.
    SyntheticSpec synth;
    synth.family = SyntheticSpec::Family::Sine;
    synth.amplitude = 1.0;
    synth.omega = 2.0 * 3.14159265358979323846 / 50.0;
    synth.n = 500;
    const AnnotatedSeries sine = generate(synth);

    const std::string dir = workdir() + "/desk";
    fs::create_directories(dir);
    const std::string csv = dir + "/sine.csv";
    {
        std::ofstream out(csv);
        out.precision(17);
        for (double v : sine.series.values) out << v << "\n";
    }

    RunManifest mf;
    mf.datasets = {{"sine", csv, "0", false}};
    mf.models = {ModelKind::Taylor2, ModelKind::RecursiveTaylor2};
    mf.learning_rates = {0.01, 0.001};
    mf.input_lens = {5, 9};
    mf.seeds = {0, 1};
    mf.substeps = {2, 4};
    mf.output_dir = dir + "/out";
    const std::vector<RunRecord> records = run_grid(mf);
    const BestTable table = best_per_cell(records);

    // Persistence baseline straight from the normalized test windows; use
    // the stricter of the two input lengths.
    const auto segments = split_series(sine.series, mf.split);
    const ScalingParams scaler = fit_scaler(segments[0]);
    double baseline = std::numeric_limits<double>::infinity();
    for (std::size_t input_len : mf.input_lens) {
        const WindowSet test_ws =
            make_windows(apply_scaler(scaler, segments[2].values), input_len);
        double acc = 0.0;
        for (std::size_t i = 0; i < test_ws.count(); ++i) {
            const double d = test_ws.targets[i] - test_ws.window(i).back();
            acc += d * d;
        }
        baseline = std::min(baseline, acc / double(test_ws.count()));
    }

    for (std::size_t m = 0; m < table.models.size(); ++m) {
        const double best = table.cells[0][m];
        check.expect(std::isfinite(best), std::string(to_string(table.models[m])) +
                                              ": no finite grid result");
        check.expect(best <= 0.5 * baseline,
                     std::string(to_string(table.models[m])) + ": best test MSE " +
                         std::to_string(best) + " not below half the persistence baseline " +
                         std::to_string(baseline));
    }
}

// ---- criterion 6: determinism --------------------------------------------

void criterion_determinism(Check& check) {
    const std::string dir = workdir() + "/determinism";
    fs::create_directories(dir);

    SyntheticSpec synth;
    synth.family = SyntheticSpec::Family::Sine;
    synth.omega = 0.21;
    synth.n = 90;
    const AnnotatedSeries sine = generate(synth);
    const std::string csv = dir + "/series.csv";
    {
        std::ofstream out(csv);
        out.precision(17);
        for (double v : sine.series.values) out << v << "\n";
    }

    const std::string manifest = dir + "/manifest.txt";
    {
        std::ofstream out(manifest);
        out << "dataset = sine, " << csv << ", 0, false\n"
            << "models = residual, recursive_taylor2\n"
            << "learning_rates = 0.01, 0.001\n"
            << "input_lens = 3, 5\n"
            << "seeds = 0, 1\n"
            << "substeps = 2, 3\n"
            << "max_epochs = 10\n"
            << "patience = 5\n"
            << "batch_size = 8\n"
            << "hidden_size = 16\n";
    }

    const int rc1 = run_cli("run " + manifest + " --workers 1 --output " + dir + "/out1");
    const int rc2 = run_cli("run " + manifest + " --workers 4 --output " + dir + "/out2");
    const int rc3 = run_cli("run " + manifest + " --workers 1 --output " + dir + "/out3");
    check.expect(rc1 == 0 && rc2 == 0 && rc3 == 0, "run subcommand failed");
    if (rc1 == 0 && rc2 == 0 && rc3 == 0) {
        const std::string a = read_file(dir + "/out1/records.csv");
        const std::string b = read_file(dir + "/out2/records.csv");
        const std::string c = read_file(dir + "/out3/records.csv");
        check.expect(a == b, "records.csv differs between 1 and 4 workers");
        check.expect(a == c, "records.csv differs between reruns");
    }
}

// ---- criterion 7: data pipeline exactness ---------------------------------

void criterion_data_pipeline(Check& check) {
    Rng rng(7007);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 10 + rng.integer(140);
        TimeSeries s;
        s.name = "prop";
        s.values.resize(n);
        const double scale = std::exp(rng.uniform(-3.0, 6.0));
        for (double& v : s.values) v = rng.uniform(-scale, scale);

        const auto segs = split_series(s, SplitSpec{0.7, 0.15, 0.15});
        Vector joined;
        for (const auto& seg : segs) {
            joined.insert(joined.end(), seg.values.begin(), seg.values.end());
        }
        if (joined != s.values) {
            check.expect(false, "split is not a partition at trial " + std::to_string(trial));
            return;
        }

        const ScalingParams p = fit_scaler(segs[0]);
        if (!p.degenerate) {
            const Vector back = invert_scaler(p, apply_scaler(p, s.values));
            for (std::size_t i = 0; i < n; ++i) {
                if (std::abs(back[i] - s.values[i]) >
                    1e-12 * std::max(1.0, std::abs(s.values[i]))) {
                    check.expect(false, "scaler round-trip off at trial " + std::to_string(trial));
                    return;
                }
            }
        }

        const std::size_t d = 1 + rng.integer(8);
        if (n > d) {
            const WindowSet ws = make_windows(s.values, d);
            if (ws.count() != n - d) {
                check.expect(false, "window count wrong at trial " + std::to_string(trial));
                return;
            }
            for (std::size_t i = 0; i + 1 < ws.count(); ++i) {
                for (std::size_t k = 0; k + 1 < d; ++k) {
                    if (ws.window(i + 1)[k] != ws.window(i)[k + 1]) {
                        check.expect(false, "window overlap broken at trial " +
                                                std::to_string(trial));
                        return;
                    }
                }
                if (ws.window(i + 1)[d - 1] != ws.targets[i]) {
                    check.expect(false, "window target broken at trial " + std::to_string(trial));
                    return;
                }
            }
        }
    }
}

// ---- criterion 8: divergence resilience -----------------------------------

void criterion_divergence_resilience(Check& check) {
    const std::string dir = workdir() + "/divergence";
    fs::create_directories(dir);

    SyntheticSpec synth;
    synth.family = SyntheticSpec::Family::Exponential;
    synth.rate = 0.08;
    synth.x0 = 1.0;
    synth.n = 120;
    const AnnotatedSeries series = generate(synth);
    const std::string csv = dir + "/exp.csv";
    {
        std::ofstream out(csv);
        out.precision(17);
        for (double v : series.series.values) out << v << "\n";
    }

    RunManifest mf;
    mf.datasets = {{"exponential", csv, "0", false}};
    mf.models = {ModelKind::Taylor2, ModelKind::RecursiveTaylor3};
    mf.learning_rates = {0.1, 0.01};
    mf.input_lens = {5, 104}; // the second one cannot fit and must be skipped
    mf.seeds = {0};
    mf.substeps = {2};
    mf.max_epochs = 120;
    mf.patience = 20;
    mf.hidden_size = 32;
    mf.output_dir = dir + "/out";

    const std::vector<RunRecord> records = run_grid(mf);
    const std::size_t expected = 2 /*models*/ * 2 /*lr*/ * 2 /*input_len*/;
    check.expect(records.size() == expected,
                 "expected " + std::to_string(expected) + " records, got " +
                     std::to_string(records.size()));
    for (const RunRecord& rec : records) {
        const bool recorded = rec.status == RunStatus::Skipped ||
                              std::isfinite(rec.test_mse) || std::isinf(rec.test_mse);
        check.expect(recorded, "cell not recorded: " + rec.dataset + "/" +
                                   to_string(rec.model) + " input_len " +
                                   std::to_string(rec.input_len));
    }

    const AggregateReport report = aggregate(records);
    emit_report(records, report, mf.output_dir);
    check.expect(fs::exists(mf.output_dir + "/summary.md"), "summary.md missing");
    const std::string summary = read_file(mf.output_dir + "/summary.md");
    check.expect(summary.find("# Benchmark summary") != std::string::npos, "summary malformed");
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> fn;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "gradient oracle (all model kinds vs central finite differences)",
         criterion_gradient_oracle},
        {2, "recursion algebra (identity growth law, constant-field m-invariance)",
         criterion_recursion_algebra},
        {3, "persistence invariant (zero-head networks predict the last element)",
         criterion_persistence},
        {4, "aggregation oracle (published table rows within tolerance)",
         criterion_aggregation_oracle},
        {5, "end-to-end desk benchmark (sine grid beats half the persistence baseline)",
         criterion_desk_benchmark},
        {6, "determinism (byte-identical records.csv across reruns and worker counts)",
         criterion_determinism},
        {7, "data pipeline exactness (1000 random series property check)",
         criterion_data_pipeline},
        {8, "divergence resilience (every cell recorded, valid summary)",
         criterion_divergence_resilience},
    };

    int failed = 0;
    for (const Criterion& criterion : criteria) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.fn(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        const auto seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        if (check.failures.empty()) {
            std::printf("[PASS] criterion %d: %s (%.1fs)\n", criterion.id, criterion.name,
                        seconds);
        } else {
            ++failed;
            std::printf("[FAIL] criterion %d: %s (%.1fs)\n", criterion.id, criterion.name,
                        seconds);
            for (const std::string& f : check.failures) {
                std::printf("       - %s\n", f.c_str());
            }
        }
        std::fflush(stdout);
    }

    if (!g_workdir.empty() && failed == 0) {
        std::error_code ec;
        fs::remove_all(g_workdir, ec);
    }
    if (failed != 0) {
        std::printf("%d of %zu criteria failed; artifacts kept in %s\n", failed, criteria.size(),
                    g_workdir.c_str());
    }
    return failed == 0 ? 0 : 1;
}
