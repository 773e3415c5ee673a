#include "taycast/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "taycast/errors.hpp"
#include "taycast/manifest.hpp"
#include "taycast/train.hpp"

namespace taycast {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Shortest decimal form that parses back to the same double.
std::string fmt_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::string fmt_fixed(double v, int digits) {
    if (std::isnan(v)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return std::string(buf);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\r') {
            // ignore
        } else {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

} // namespace

const char* to_string(RunStatus status) {
    switch (status) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Skipped: return "skipped";
    }
    return "unknown";
}

void RunManifest::validate_and_canonicalize() {
    if (datasets.empty()) throw ConfigError("manifest: no datasets");
    if (models.empty()) throw ConfigError("manifest: no models");
    if (learning_rates.empty()) throw ConfigError("manifest: no learning rates");
    if (input_lens.empty()) throw ConfigError("manifest: no input lengths");
    if (seeds.empty()) throw ConfigError("manifest: no seeds");
    split.validate();
    if (max_epochs < 1) throw ConfigError("manifest: max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("manifest: patience must be >= 1");
    if (batch_size < 1) throw ConfigError("manifest: batch_size must be >= 1");
    if (hidden_size < 1) throw ConfigError("manifest: hidden_size must be >= 1");
    if (!(delta_t > 0.0)) throw ConfigError("manifest: delta_t must be positive");
    if (workers < 1) throw ConfigError("manifest: workers must be >= 1");

    auto sort_unique = [](auto& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    std::sort(datasets.begin(), datasets.end(),
              [](const DatasetRef& a, const DatasetRef& b) { return a.name < b.name; });
    for (std::size_t i = 1; i < datasets.size(); ++i) {
        if (datasets[i].name == datasets[i - 1].name) {
            throw ConfigError("manifest: duplicate dataset name '" + datasets[i].name + "'");
        }
    }
    sort_unique(models);
    sort_unique(learning_rates);
    sort_unique(input_lens);
    sort_unique(seeds);
    sort_unique(substeps);

    for (double lr : learning_rates) {
        if (!(lr > 0.0)) throw ConfigError("manifest: learning rates must be positive");
    }
    for (std::size_t len : input_lens) {
        if (len < 1) throw ConfigError("manifest: input lengths must be >= 1");
    }
    for (int m : substeps) {
        if (m < 2) throw ConfigError("manifest: substeps must be >= 2");
    }
    const bool any_recursive =
        std::any_of(models.begin(), models.end(), [](ModelKind k) { return is_recursive(k); });
    if (any_recursive && substeps.empty()) {
        throw ConfigError("manifest: recursive models need a substeps list");
    }
}

RunManifest parse_run_manifest(const std::string& path) {
    const KvDoc doc = KvDoc::parse_file(path);
    doc.require_known_keys({"dataset", "models", "learning_rates", "input_lens", "seeds",
                            "substeps", "train_frac", "val_frac", "test_frac", "max_epochs",
                            "patience", "batch_size", "hidden_size", "delta_t", "workers",
                            "output_dir"});
    RunManifest mf;
    for (const std::string& line : doc.all("dataset")) {
        const std::vector<std::string> fields = split_list(line);
        if (fields.size() < 2 || fields.size() > 4) {
            throw ConfigError(path + ": dataset entry needs 'name, path[, column[, has_header]]': " +
                              line);
        }
        DatasetRef ref;
        ref.name = fields[0];
        ref.path = fields[1];
        if (fields.size() > 2) ref.column = fields[2];
        if (fields.size() > 3) ref.has_header = parse_bool(fields[3], path + ": dataset has_header");
        mf.datasets.push_back(std::move(ref));
    }
    if (doc.has("models")) {
        mf.models.clear();
        for (const std::string& name : split_list(doc.get("models", ""))) {
            const auto kind = model_kind_from_string(name);
            if (!kind) throw ConfigError(path + ": unknown model '" + name + "'");
            mf.models.push_back(*kind);
        }
    }
    mf.learning_rates = doc.get_double_list("learning_rates", mf.learning_rates);
    if (doc.has("input_lens")) {
        mf.input_lens.clear();
        for (long v : doc.get_long_list("input_lens", {})) {
            if (v < 1) throw ConfigError(path + ": input_lens must be >= 1");
            mf.input_lens.push_back(std::size_t(v));
        }
    }
    if (doc.has("seeds")) {
        mf.seeds.clear();
        for (long v : doc.get_long_list("seeds", {})) {
            if (v < 0) throw ConfigError(path + ": seeds must be >= 0");
            mf.seeds.push_back(std::uint64_t(v));
        }
    }
    if (doc.has("substeps")) {
        mf.substeps.clear();
        for (long v : doc.get_long_list("substeps", {})) mf.substeps.push_back(int(v));
    }
    mf.split.train_frac = doc.get_double("train_frac", mf.split.train_frac);
    mf.split.val_frac = doc.get_double("val_frac", mf.split.val_frac);
    mf.split.test_frac = doc.get_double("test_frac", mf.split.test_frac);
    mf.max_epochs = int(doc.get_long("max_epochs", mf.max_epochs));
    mf.patience = int(doc.get_long("patience", mf.patience));
    mf.batch_size = std::size_t(doc.get_long("batch_size", long(mf.batch_size)));
    mf.hidden_size = std::size_t(doc.get_long("hidden_size", long(mf.hidden_size)));
    mf.delta_t = doc.get_double("delta_t", mf.delta_t);
    mf.workers = int(doc.get_long("workers", mf.workers));
    mf.output_dir = doc.get("output_dir", mf.output_dir);
    return mf;
}

namespace {

struct Cell {
    std::size_t dataset_index;
    ModelKind model;
    double learning_rate;
    std::size_t input_len;
    std::uint64_t seed;
    int substeps;
};

RunRecord run_cell(const RunManifest& mf, const TimeSeries& series, const Cell& cell) {
    RunRecord rec;
    rec.dataset = series.name;
    rec.model = cell.model;
    rec.learning_rate = cell.learning_rate;
    rec.input_len = cell.input_len;
    rec.seed = cell.seed;
    rec.substeps = cell.substeps;
    rec.train_mse = kNan;
    rec.val_mse = kNan;
    rec.test_mse = kNan;

    auto skip = [&rec](const std::string& why) {
        rec.status = RunStatus::Skipped;
        rec.note = one_line(why);
        return rec;
    };

    std::array<TimeSeries, 3> segments;
    try {
        segments = split_series(series, mf.split);
    } catch (const ConfigError& e) {
        return skip(e.what());
    }
    const char* tags[3] = {"train", "val", "test"};
    for (int s = 0; s < 3; ++s) {
        if (segments[s].length() <= cell.input_len) {
            return skip(std::string(tags[s]) + " segment of length " +
                        std::to_string(segments[s].length()) + " too short for input_len " +
                        std::to_string(cell.input_len));
        }
    }

    try {
        const ScalingParams scaler = fit_scaler(segments[0]);
        const WindowSet train_ws =
            make_windows(apply_scaler(scaler, segments[0].values), cell.input_len);
        const WindowSet val_ws =
            make_windows(apply_scaler(scaler, segments[1].values), cell.input_len);
        const WindowSet test_ws =
            make_windows(apply_scaler(scaler, segments[2].values), cell.input_len);

        ModelSpec spec;
        spec.kind = cell.model;
        spec.input_len = cell.input_len;
        spec.hidden_size = mf.hidden_size;
        spec.delta_t = mf.delta_t;
        spec.substeps = cell.substeps;

        TrainConfig config;
        config.learning_rate = cell.learning_rate;
        config.seed = cell.seed;
        config.max_epochs = mf.max_epochs;
        config.patience = mf.patience;
        config.batch_size = mf.batch_size;

        const TrainReport report = train_model(spec, train_ws, val_ws, config, &test_ws);
        rec.epochs_run = report.epochs_run;
        rec.train_mse = report.train_mse;
        rec.val_mse = report.best_val_mse;
        rec.test_mse = report.test_mse;
        rec.status = report.diverged ? RunStatus::Diverged : RunStatus::Ok;
        if (report.diverged) rec.note = "non-finite loss";
    } catch (const std::exception& e) {
        return skip(e.what());
    }
    return rec;
}

} // namespace

std::vector<RunRecord> run_grid(const RunManifest& manifest) {
    RunManifest mf = manifest;
    mf.validate_and_canonicalize();

    std::vector<TimeSeries> series;
    series.reserve(mf.datasets.size());
    for (const DatasetRef& ref : mf.datasets) {
        TimeSeries s = load_series(ref.path, ref.column, ref.has_header);
        s.name = ref.name;
        series.push_back(std::move(s));
    }

    // Nested loops over the sorted axes produce the canonical
    // (dataset, model, learning_rate, input_len, seed, substeps) order.
    std::vector<Cell> cells;
    for (std::size_t d = 0; d < mf.datasets.size(); ++d) {
        for (ModelKind model : mf.models) {
            for (double lr : mf.learning_rates) {
                for (std::size_t len : mf.input_lens) {
                    for (std::uint64_t seed : mf.seeds) {
                        if (is_recursive(model)) {
                            for (int m : mf.substeps) cells.push_back({d, model, lr, len, seed, m});
                        } else {
                            cells.push_back({d, model, lr, len, seed, 1});
                        }
                    }
                }
            }
        }
    }

    std::vector<RunRecord> records(cells.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            records[i] = run_cell(mf, series[cells[i].dataset_index], cells[i]);
        }
    };

    const std::size_t worker_count =
        std::min<std::size_t>(std::size_t(mf.workers), std::max<std::size_t>(cells.size(), 1));
    if (worker_count <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (std::size_t w = 0; w < worker_count; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    return records;
}

BestTable best_per_cell(const std::vector<RunRecord>& records) {
    BestTable table;
    std::map<std::string, std::size_t> dataset_index;
    std::map<ModelKind, std::size_t> model_index;
    for (const RunRecord& rec : records) {
        if (dataset_index.emplace(rec.dataset, table.datasets.size()).second) {
            table.datasets.push_back(rec.dataset);
        }
        if (model_index.emplace(rec.model, table.models.size()).second) {
            table.models.push_back(rec.model);
        }
    }
    table.cells.assign(table.datasets.size(),
                       std::vector<double>(table.models.size(), kNan));
    for (const RunRecord& rec : records) {
        if (!std::isfinite(rec.test_mse)) continue;
        double& cell = table.cells[dataset_index[rec.dataset]][model_index[rec.model]];
        if (std::isnan(cell) || rec.test_mse < cell) cell = rec.test_mse;
    }
    return table;
}

namespace {

bool row_complete(const std::vector<double>& row) {
    return std::none_of(row.begin(), row.end(), [](double v) { return std::isnan(v); });
}

// Ascending fractional ranks; ties get the mean of their positions.
std::vector<double> fractional_ranks(const std::vector<double>& row) {
    const std::size_t m = row.size();
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    std::vector<double> ranks(m, 0.0);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && row[order[j + 1]] == row[order[i]]) ++j;
        const double rank = (double(i) + double(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double median(std::vector<double> v) {
    if (v.empty()) return kNan;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return v[mid];
    return (v[mid - 1] + v[mid]) / 2.0;
}

} // namespace

std::vector<double> average_rank(const BestTable& table) {
    const std::size_t m = table.models.size();
    std::vector<double> sum(m, 0.0);
    std::size_t rows = 0;
    for (const auto& row : table.cells) {
        if (!row_complete(row)) continue;
        const std::vector<double> ranks = fractional_ranks(row);
        for (std::size_t i = 0; i < m; ++i) sum[i] += ranks[i];
        ++rows;
    }
    std::vector<double> out(m, kNan);
    if (rows == 0) return out;
    for (std::size_t i = 0; i < m; ++i) out[i] = sum[i] / double(rows);
    return out;
}

std::vector<double> median_percent_deviation(const BestTable& table) {
    const std::size_t m = table.models.size();
    std::vector<std::vector<double>> devs(m);
    for (const auto& row : table.cells) {
        if (!row_complete(row)) continue;
        const double best = *std::min_element(row.begin(), row.end());
        if (!(best > 0.0)) continue;
        for (std::size_t i = 0; i < m; ++i) devs[i].push_back(100.0 * (row[i] - best) / best);
    }
    std::vector<double> out(m, kNan);
    for (std::size_t i = 0; i < m; ++i) out[i] = median(std::move(devs[i]));
    return out;
}

AggregateReport aggregate(const std::vector<RunRecord>& records) {
    if (records.empty()) throw InputError("aggregate: no records");
    AggregateReport report;
    report.table = best_per_cell(records);
    const BestTable& table = report.table;

    for (std::size_t d = 0; d < table.datasets.size(); ++d) {
        const auto& row = table.cells[d];
        if (!row_complete(row)) {
            std::string missing;
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (std::isnan(row[i])) {
                    if (!missing.empty()) missing += ", ";
                    missing += to_string(table.models[i]);
                }
            }
            report.warnings.push_back("dataset '" + table.datasets[d] +
                                      "' has no finite result for: " + missing +
                                      "; excluded from aggregate metrics");
            report.winners.emplace_back();
            continue;
        }
        const double best = *std::min_element(row.begin(), row.end());
        std::vector<std::size_t> winners;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i] == best) winners.push_back(i);
        }
        if (!(best > 0.0)) {
            report.warnings.push_back("dataset '" + table.datasets[d] +
                                      "' has a zero best error; excluded from percent deviation");
        }
        report.winners.push_back(std::move(winners));
    }

    report.avg_rank = average_rank(table);
    report.median_pct_dev = median_percent_deviation(table);
    return report;
}

void write_records_csv(const std::vector<RunRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw IoError("cannot write " + path);
    out << "dataset,model,learning_rate,input_len,seed,substeps,epochs_run,"
           "train_mse,val_mse,test_mse,status,note\n";
    for (const RunRecord& rec : records) {
        out << csv_escape(rec.dataset) << ',' << to_string(rec.model) << ','
            << fmt_double(rec.learning_rate) << ',' << rec.input_len << ',' << rec.seed << ','
            << rec.substeps << ',' << rec.epochs_run << ',' << fmt_double(rec.train_mse) << ','
            << fmt_double(rec.val_mse) << ',' << fmt_double(rec.test_mse) << ','
            << to_string(rec.status) << ',' << csv_escape(one_line(rec.note)) << '\n';
    }
    if (!out.good()) throw IoError("failed while writing " + path);
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");

    std::vector<RunRecord> records;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const std::vector<std::string> f = parse_csv_line(line);
        if (f.size() != 12) {
            throw ParseError(path + ": row " + std::to_string(row) + " has " +
                             std::to_string(f.size()) + " fields, expected 12");
        }
        RunRecord rec;
        rec.dataset = f[0];
        const auto kind = model_kind_from_string(f[1]);
        if (!kind) {
            throw ParseError(path + ": row " + std::to_string(row) + ": unknown model '" + f[1] +
                             "'");
        }
        rec.model = *kind;
        const std::string where = path + ": row " + std::to_string(row);
        rec.learning_rate = parse_double(f[2], where);
        rec.input_len = std::size_t(parse_long(f[3], where));
        rec.seed = std::uint64_t(parse_long(f[4], where));
        rec.substeps = int(parse_long(f[5], where));
        rec.epochs_run = int(parse_long(f[6], where));
        rec.train_mse = parse_double(f[7], where);
        rec.val_mse = parse_double(f[8], where);
        rec.test_mse = parse_double(f[9], where);
        if (f[10] == "ok") rec.status = RunStatus::Ok;
        else if (f[10] == "diverged") rec.status = RunStatus::Diverged;
        else if (f[10] == "skipped") rec.status = RunStatus::Skipped;
        else throw ParseError(where + ": unknown status '" + f[10] + "'");
        rec.note = f[11];
        records.push_back(std::move(rec));
    }
    return records;
}

void emit_report(const std::vector<RunRecord>& records, const AggregateReport& report,
                 const std::string& output_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + output_dir + ": " + ec.message());

    const std::string records_path = output_dir + "/records.csv";
    const std::string table_path = output_dir + "/best_table.csv";
    const std::string summary_path = output_dir + "/summary.md";

    std::ofstream table_out(table_path, std::ios::binary);
    std::ofstream summary_out(summary_path, std::ios::binary);
    if (!table_out.is_open() || !summary_out.is_open()) {
        throw IoError("cannot write report files under " + output_dir);
    }

    write_records_csv(records, records_path);

    const BestTable& table = report.table;
    table_out << "dataset";
    for (ModelKind m : table.models) table_out << ',' << to_string(m);
    table_out << '\n';
    for (std::size_t d = 0; d < table.datasets.size(); ++d) {
        table_out << csv_escape(table.datasets[d]);
        for (double v : table.cells[d]) table_out << ',' << fmt_double(v);
        table_out << '\n';
    }
    if (!table_out.good()) throw IoError("failed while writing " + table_path);

    summary_out << "# Benchmark summary\n\n";
    summary_out << "Best test MSE per dataset and model; the best model per dataset is bold.\n\n";
    summary_out << "| dataset |";
    for (ModelKind m : table.models) summary_out << ' ' << to_string(m) << " |";
    summary_out << "\n|---|";
    for (std::size_t i = 0; i < table.models.size(); ++i) summary_out << "---:|";
    summary_out << '\n';
    for (std::size_t d = 0; d < table.datasets.size(); ++d) {
        summary_out << "| " << table.datasets[d] << " |";
        const auto& winners = report.winners[d];
        for (std::size_t i = 0; i < table.models.size(); ++i) {
            const double v = table.cells[d][i];
            const bool won = std::find(winners.begin(), winners.end(), i) != winners.end();
            summary_out << ' ';
            if (std::isnan(v)) {
                summary_out << "n/a";
            } else if (won) {
                summary_out << "**" << fmt_fixed(v, 6) << "**";
            } else {
                summary_out << fmt_fixed(v, 6);
            }
            summary_out << " |";
        }
        summary_out << '\n';
    }
    summary_out << "| Average Rank |";
    for (double v : report.avg_rank) summary_out << ' ' << fmt_fixed(v, 2) << " |";
    summary_out << '\n';
    summary_out << "| Median Percent Deviation |";
    for (double v : report.median_pct_dev) summary_out << ' ' << fmt_fixed(v, 1) << " |";
    summary_out << '\n';

    if (!report.warnings.empty()) {
        summary_out << "\n## Warnings\n\n";
        for (const std::string& w : report.warnings) summary_out << "- " << w << '\n';
    }
    if (!summary_out.good()) throw IoError("failed while writing " + summary_path);
}

} // namespace taycast
