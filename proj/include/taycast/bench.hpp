#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taycast/data.hpp"
#include "taycast/model.hpp"

namespace taycast {

struct DatasetRef {
    std::string name;
    std::string path;
    std::string column = "0";
    bool has_header = false;
};

// The full search space for one benchmark run. The substeps grid applies
// only to recursive kinds; non-recursive cells run once with substeps 1.
struct RunManifest {
    std::vector<DatasetRef> datasets;
    std::vector<ModelKind> models;
    std::vector<double> learning_rates = {0.1, 0.01, 0.001};
    std::vector<std::size_t> input_lens = {3, 5, 7, 9, 11, 13};
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    std::vector<int> substeps = {2, 3, 4, 5, 6, 7, 8};
    SplitSpec split;
    int max_epochs = 2000;
    int patience = 50;
    std::size_t batch_size = 32;
    std::size_t hidden_size = 128;
    double delta_t = 1.0;
    int workers = 1;
    std::string output_dir = "out";

    // Sorts and dedupes the grid axes into canonical order and checks the
    // fields; throws ConfigError on an invalid manifest.
    void validate_and_canonicalize();
};

RunManifest parse_run_manifest(const std::string& path);

enum class RunStatus { Ok, Diverged, Skipped };

const char* to_string(RunStatus status);

// One grid cell's result.
struct RunRecord {
    std::string dataset;
    ModelKind model = ModelKind::Residual;
    double learning_rate = 0.0;
    std::size_t input_len = 0;
    std::uint64_t seed = 0;
    int substeps = 1;
    int epochs_run = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double test_mse = 0.0;
    RunStatus status = RunStatus::Ok;
    std::string note;
};

// Trains every cell of the Cartesian grid. Records come back in canonical
// (dataset, model, learning_rate, input_len, seed, substeps) order no
// matter how many workers execute them. Cells whose dataset is too short
// are recorded as skipped with a reason.
std::vector<RunRecord> run_grid(const RunManifest& manifest);

// Minimum finite test MSE per (dataset, model); NaN marks a cell with no
// finite run.
struct BestTable {
    std::vector<std::string> datasets;
    std::vector<ModelKind> models;
    std::vector<std::vector<double>> cells; // [dataset][model]
};

BestTable best_per_cell(const std::vector<RunRecord>& records);

// Per-model mean of ascending-error ranks across complete dataset rows,
// with fractional (mean) ranks for ties. Rows containing a missing cell
// are ignored.
std::vector<double> average_rank(const BestTable& table);

// Per-model median over datasets of 100*(error - best)/best. Rows with a
// missing cell or a zero best are ignored; NaN when nothing remains.
std::vector<double> median_percent_deviation(const BestTable& table);

struct AggregateReport {
    BestTable table;
    std::vector<double> avg_rank;
    std::vector<double> median_pct_dev;
    std::vector<std::vector<std::size_t>> winners; // per dataset row, model indexes at the minimum
    std::vector<std::string> warnings;
};

AggregateReport aggregate(const std::vector<RunRecord>& records);

// records.csv, best_table.csv, and summary.md under output_dir. Reruns
// with identical records produce byte-identical files.
void emit_report(const std::vector<RunRecord>& records, const AggregateReport& report,
                 const std::string& output_dir);

void write_records_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_records_csv(const std::string& path);

} // namespace taycast
