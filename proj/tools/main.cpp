#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taycast/bench.hpp"
#include "taycast/errors.hpp"
#include "taycast/manifest.hpp"
#include "taycast/synth.hpp"

namespace {

void apply_overrides(taycast::RunManifest& manifest, int workers, const std::string& output,
                     const std::string& seed_list, const std::string& model_list) {
    if (workers > 0) manifest.workers = workers;
    if (!output.empty()) manifest.output_dir = output;
    if (!seed_list.empty()) {
        manifest.seeds.clear();
        for (const std::string& s : taycast::split_list(seed_list)) {
            manifest.seeds.push_back(std::uint64_t(taycast::parse_long(s, "--seed-list")));
        }
    }
    if (!model_list.empty()) {
        manifest.models.clear();
        for (const std::string& name : taycast::split_list(model_list)) {
            const auto kind = taycast::model_kind_from_string(name);
            if (!kind) throw taycast::ConfigError("--models: unknown model '" + name + "'");
            manifest.models.push_back(*kind);
        }
    }
}

int cmd_run(const std::string& manifest_path, int workers, const std::string& output,
            const std::string& seed_list, const std::string& model_list) {
    taycast::RunManifest manifest = taycast::parse_run_manifest(manifest_path);
    apply_overrides(manifest, workers, output, seed_list, model_list);
    manifest.validate_and_canonicalize();

    const std::vector<taycast::RunRecord> records = taycast::run_grid(manifest);
    const taycast::AggregateReport report = taycast::aggregate(records);
    taycast::emit_report(records, report, manifest.output_dir);

    std::size_t ok = 0, diverged = 0, skipped = 0;
    for (const auto& rec : records) {
        switch (rec.status) {
        case taycast::RunStatus::Ok: ++ok; break;
        case taycast::RunStatus::Diverged: ++diverged; break;
        case taycast::RunStatus::Skipped: ++skipped; break;
        }
    }
    std::cout << records.size() << " cells (" << ok << " ok, " << diverged << " diverged, "
              << skipped << " skipped); reports in " << manifest.output_dir << "\n";
    for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_aggregate(const std::string& records_path, const std::string& output) {
    const std::vector<taycast::RunRecord> records = taycast::read_records_csv(records_path);
    const taycast::AggregateReport report = taycast::aggregate(records);
    taycast::emit_report(records, report, output);

    std::cout << "| model | avg_rank | median_pct_dev |\n";
    for (std::size_t i = 0; i < report.table.models.size(); ++i) {
        std::printf("| %s | %.2f | %.1f |\n", taycast::to_string(report.table.models[i]),
                    report.avg_rank[i], report.median_pct_dev[i]);
    }
    for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
    std::cout << "reports in " << output << "\n";
    return 0;
}

int cmd_probe(const std::string& manifest_path, const std::string& output) {
    taycast::ProbeManifest manifest = taycast::parse_probe_manifest(manifest_path);
    if (!output.empty()) manifest.output_dir = output;

    const taycast::ProbeRunResult result = taycast::run_probe(manifest);
    taycast::write_probe_report(result, manifest.output_dir);

    std::printf("training: %d epochs, val MSE %.3e, test MSE %.3e%s\n", result.training.epochs_run,
                result.training.best_val_mse, result.training.test_mse,
                result.training.diverged ? " (diverged)" : "");
    for (const auto& s : result.report.orders) {
        if (s.correlation_defined) {
            std::printf("order %d: rmse %.6e, correlation %.4f\n", s.order, s.rmse, s.correlation);
        } else {
            std::printf("order %d: rmse %.6e, correlation %s\n", s.order, s.rmse, s.note.c_str());
        }
    }
    std::cout << "probe report in " << manifest.output_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Taylor-expansion neural predictors and benchmark harness for univariate "
                 "time series"};
    app.require_subcommand(1);

    std::string manifest_path;
    std::string records_path;
    std::string output;
    std::string seed_list;
    std::string model_list;
    int workers = 0;

    CLI::App* run = app.add_subcommand("run", "execute a benchmark grid from a manifest");
    run->add_option("manifest", manifest_path, "run manifest file")->required();
    run->add_option("--workers", workers, "worker threads (overrides manifest)");
    run->add_option("--output", output, "output directory (overrides manifest)");
    run->add_option("--seed-list", seed_list, "comma-separated seeds (overrides manifest)");
    run->add_option("--models", model_list, "comma-separated models (overrides manifest)");

    CLI::App* agg = app.add_subcommand("aggregate", "recompute reports from a records.csv");
    agg->add_option("records", records_path, "records.csv from a previous run")->required();
    std::string agg_output = "out";
    agg->add_option("--output", agg_output, "output directory");

    CLI::App* probe = app.add_subcommand("probe", "synthetic-dynamics diagnostics");
    probe->add_option("manifest", manifest_path, "probe manifest file")->required();
    probe->add_option("--output", output, "output directory (overrides manifest)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(manifest_path, workers, output, seed_list, model_list);
        if (agg->parsed()) return cmd_aggregate(records_path, agg_output);
        if (probe->parsed()) return cmd_probe(manifest_path, output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
