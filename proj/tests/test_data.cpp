#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "taycast/data.hpp"
#include "taycast/errors.hpp"
#include "taycast/rng.hpp"

using namespace taycast;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = (std::filesystem::temp_directory_path() /
                ("taycast_test_" + std::to_string(++counter) + "_" +
                 std::to_string(::getpid()) + ".csv"))
                   .string();
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

} // namespace

TEST_CASE("load_series: bare column") {
    TempFile f("1\n2\n3\n");
    const TimeSeries s = load_series(f.path, "0", false);
    CHECK(s.values == Vector{1, 2, 3});
}

TEST_CASE("load_series: header and named column") {
    TempFile f("t,x\n0,5\n1,7\n");
    const TimeSeries s = load_series(f.path, "x", true);
    CHECK(s.values == Vector{5, 7});

    const TimeSeries by_index = load_series(f.path, "1", true);
    CHECK(by_index.values == Vector{5, 7});
}

TEST_CASE("load_series: whitespace delimited") {
    TempFile f("1 10\n2 20\n3 30\n");
    const TimeSeries s = load_series(f.path, "1", false);
    CHECK(s.values == Vector{10, 20, 30});
}

TEST_CASE("load_series errors") {
    CHECK_THROWS_AS(load_series("/nonexistent/file.csv", "0", false), IoError);

    TempFile bad("1\nabc\n3\n");
    try {
        load_series(bad.path, "0", false);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }

    TempFile missing_col("a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(load_series(missing_col.path, "z", true), ConfigError);

    TempFile too_short("42\n");
    CHECK_THROWS_AS(load_series(too_short.path, "0", false), InsufficientDataError);

    TempFile nonfinite("1\ninf\n3\n");
    CHECK_THROWS_AS(load_series(nonfinite.path, "0", false), ParseError);
}

TEST_CASE("split_series: floor boundaries and partition") {
    TimeSeries s;
    s.name = "t";
    for (int i = 0; i < 10; ++i) s.values.push_back(i);
    const auto segs = split_series(s, SplitSpec{0.7, 0.15, 0.15});
    CHECK(segs[0].length() == 7);
    CHECK(segs[1].length() == 1);
    CHECK(segs[2].length() == 2);

    Vector joined;
    for (const auto& seg : segs) joined.insert(joined.end(), seg.values.begin(), seg.values.end());
    CHECK(joined == s.values);

    CHECK_THROWS_AS(split_series(s, SplitSpec{1.0, 0.0, 0.0}), ConfigError);
    TimeSeries tiny;
    tiny.values = {1, 2};
    CHECK_THROWS_AS(split_series(tiny, SplitSpec{0.7, 0.15, 0.15}), ConfigError);
}

TEST_CASE("scaler: examples and degenerate convention") {
    TimeSeries train;
    train.values = {2, 4, 6};
    const ScalingParams p = fit_scaler(train);
    CHECK(!p.degenerate);
    const Vector scaled = apply_scaler(p, train.values);
    CHECK(scaled == Vector{0.0, 0.5, 1.0});

    TimeSeries flat;
    flat.values = {3, 3, 3};
    const ScalingParams q = fit_scaler(flat);
    CHECK(q.degenerate);
    CHECK(apply_scaler(q, flat.values) == Vector{0.5, 0.5, 0.5});
    CHECK(invert_scaler(q, Vector{0.5, 0.9}) == Vector{3.0, 3.0});
}

TEST_CASE("make_windows: examples and errors") {
    const Vector values = {1, 2, 3, 4, 5};
    const WindowSet ws = make_windows(values, 3);
    CHECK(ws.count() == 2);
    CHECK(ws.window(0)[0] == 1);
    CHECK(ws.window(0)[2] == 3);
    CHECK(ws.window(1)[0] == 2);
    CHECK(ws.window(1)[2] == 4);
    CHECK(ws.targets == Vector{4, 5});

    CHECK_THROWS_AS(make_windows(Vector{1, 2, 3, 4}, 4), InsufficientDataError);
}

TEST_CASE("property: windows reconstruct, scaler round-trips, splits partition") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 10 + rng.integer(120);
        TimeSeries s;
        s.name = "prop";
        s.values.resize(n);
        for (double& v : s.values) v = rng.uniform(-100.0, 100.0);

        // Split partition: no gap, no overlap.
        const auto segs = split_series(s, SplitSpec{0.7, 0.15, 0.15});
        Vector joined;
        for (const auto& seg : segs) {
            joined.insert(joined.end(), seg.values.begin(), seg.values.end());
        }
        CHECK(joined == s.values);

        // Scaler round-trip within 1e-12.
        const ScalingParams p = fit_scaler(segs[0]);
        if (!p.degenerate) {
            const Vector back = invert_scaler(p, apply_scaler(p, s.values));
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(std::abs(back[i] - s.values[i]) <= 1e-12 * std::max(1.0, std::abs(s.values[i])));
            }
        }

        // Window overlap structure.
        const std::size_t d = 1 + rng.integer(6);
        if (n > d) {
            const WindowSet ws = make_windows(s.values, d);
            CHECK(ws.count() == n - d);
            for (std::size_t i = 0; i + 1 < ws.count(); ++i) {
                for (std::size_t k = 0; k + 1 < d; ++k) {
                    CHECK(ws.window(i + 1)[k] == ws.window(i)[k + 1]);
                }
                CHECK(ws.window(i + 1)[d - 1] == ws.targets[i]);
            }
        }
    }
}
