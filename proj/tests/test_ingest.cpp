#include "test_util.hpp"

#include "oprc/features.hpp"
#include "oprc/ingest.hpp"

using namespace oprc;
using oprc::test::temp_dir;

namespace {

std::string ohlc_csv(int rows, calendar_day start = parse_iso_date("2021-01-04"), std::uint64_t seed = 3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<real> step(0.0, 1.0);
    std::string s = "date,open,high,low,close,volume\n";
    real price = 100;
    calendar_day d = start;
    for (int i = 0; i < rows; ++i) {
        real open = price;
        price = std::max(1.0, price + step(rng));
        real hi = std::max(open, price) + 0.5, lo = std::min(open, price) - 0.5;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.4f,%.4f,%d\n", format_iso_date(d).c_str(), open, hi, lo, price, 1000 + i);
        s += buf;
        d += std::chrono::days{1};
    }
    return s;
}

std::string dense_macro_csv(calendar_day start, int days, real base) {
    std::string s = "date,value\n";
    for (int i = 0; i < days; ++i) s += format_iso_date(start + std::chrono::days{i}) + "," + std::to_string(base + 0.01 * i) + "\n";
    return s;
}

std::vector<macro_series> dense_macros(const temp_dir& dir, calendar_day start, int days) {
    std::vector<macro_series> m;
    real base = 10;
    for (auto name : macro_names) {
        auto p = dir.write(std::string(name) + ".csv", dense_macro_csv(start, days, base += 5));
        m.push_back(load_macro_csv(p.string(), std::string(name)));
    }
    return m;
}

feature_frame tiny_frame(int rows) {
    feature_frame f;
    f.inputs.resize(rows, n_features);
    f.target.resize(rows);
    calendar_day d = parse_iso_date("2022-01-03");
    for (int i = 0; i < rows; ++i) {
        f.dates.push_back(d + std::chrono::days{i});
        for (int j = 0; j < n_features; ++j) f.inputs(i, j) = i * (j + 1) + j;
        f.target[i] = 2.0 * i + 1;
    }
    return f;
}

} // namespace

TEST(LoadOhlc, ThreeRowsInOrder) {
    temp_dir dir;
    auto p = dir.write("a.csv",
                       "date,open,high,low,close,volume\n"
                       "2023-05-01,10,11,9,10.5,100\n"
                       "2023-05-02,10.5,12,10,11,200\n"
                       "2023-05-03,11,11.5,10.2,10.8,150\n");
    auto s = load_ohlc_csv(p.string(), "^NYA");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.ticker, "^NYA");
    EXPECT_EQ(format_iso_date(s.bars[0].date), "2023-05-01");
    EXPECT_EQ(format_iso_date(s.bars[2].date), "2023-05-03");
    EXPECT_DOUBLE_EQ(s.bars[1].close, 11.0);
}

TEST(LoadOhlc, DuplicateDateNamesTheDate) {
    temp_dir dir;
    auto p = dir.write("a.csv",
                       "date,open,high,low,close,volume\n"
                       "2023-05-01,10,11,9,10.5,100\n"
                       "2023-05-01,10.5,12,10,11,200\n");
    try {
        load_ohlc_csv(p.string());
        FAIL() << "expected integrity_error";
    } catch (const integrity_error& e) {
        EXPECT_NE(std::string(e.what()).find("2023-05-01"), std::string::npos);
    }
}

TEST(LoadOhlc, NonMonotonicDates) {
    temp_dir dir;
    auto p = dir.write("a.csv",
                       "date,open,high,low,close,volume\n"
                       "2023-05-02,10,11,9,10.5,100\n"
                       "2023-05-01,10.5,12,10,11,200\n");
    EXPECT_THROW(load_ohlc_csv(p.string()), integrity_error);
}

TEST(LoadOhlc, MalformedRowReportsLineNumber) {
    temp_dir dir;
    auto p = dir.write("a.csv",
                       "date,open,high,low,close,volume\n"
                       "2023-05-01,10,11,9,10.5,100\n"
                       "2023-05-02,10.5,abc,10,11,200\n");
    try {
        load_ohlc_csv(p.string());
        FAIL() << "expected parse_error";
    } catch (const parse_error& e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    }
    auto q = dir.write("b.csv", "date,open,high,low,close,volume\n2023-05-01,10,11,9\n");
    EXPECT_THROW(load_ohlc_csv(q.string()), parse_error);
    auto r = dir.write("c.csv", "day,open,high,low,close,volume\n");
    EXPECT_THROW(load_ohlc_csv(r.string()), parse_error);
    auto bad_date = dir.write("d.csv", "date,open,high,low,close,volume\n2023-02-30,10,11,9,10,1\n");
    EXPECT_THROW(load_ohlc_csv(bad_date.string()), parse_error);
}

TEST(LoadOhlc, RejectsInconsistentBars) {
    temp_dir dir;
    auto p = dir.write("a.csv", "date,open,high,low,close,volume\n2023-05-01,10,9.5,9,10.5,100\n");
    EXPECT_THROW(load_ohlc_csv(p.string()), integrity_error);
    auto q = dir.write("b.csv", "date,open,high,low,close,volume\n2023-05-01,10,11,-1,10.5,100\n");
    EXPECT_THROW(load_ohlc_csv(q.string()), integrity_error);
}

TEST(LoadOhlc, SixHundredRowExportSupportsTrainTestSplit) {
    temp_dir dir;
    auto p = dir.write("nya.csv", ohlc_csv(600));
    auto s = load_ohlc_csv(p.string(), "^NYA");
    EXPECT_EQ(s.size(), 600u);
    // Indicator warm-up consumes 26 rows, so 626 bars give a full 600-row frame.
    auto q = dir.write("nya_long.csv", ohlc_csv(626));
    auto longer = load_ohlc_csv(q.string(), "^NYA");
    auto frame = align_and_join(longer, dense_macros(dir, longer.bars.front().date, 700), compute_indicators(longer));
    ASSERT_EQ(frame.rows(), 600);
    auto [train, test] = split(frame, 500, 100);
    EXPECT_EQ(train.rows(), 500);
    EXPECT_EQ(test.rows(), 100);
}

TEST(LoadMacro, SparseMonthlySeries) {
    temp_dir dir;
    auto p = dir.write("umc.csv", "date,value\n2023-01-01,64.9\n2023-02-01,67.0\n2023-03-01,62.0\n");
    auto m = load_macro_csv(p.string(), "UMCSENT");
    ASSERT_EQ(m.points.size(), 3u);
    EXPECT_EQ(m.name, "UMCSENT");
    EXPECT_DOUBLE_EQ(m.points[1].value, 67.0);
}

TEST(LoadMacro, SinglePointAndErrors) {
    temp_dir dir;
    auto one = dir.write("one.csv", "date,value\n2023-01-01,5.33\n");
    EXPECT_EQ(load_macro_csv(one.string(), "EFFR").points.size(), 1u);
    auto na = dir.write("na.csv", "date,value\n2023-01-01,N/A\n");
    EXPECT_THROW(load_macro_csv(na.string(), "EFFR"), parse_error);
    auto empty = dir.write("empty.csv", "");
    EXPECT_THROW(load_macro_csv(empty.string(), "EFFR"), parse_error);
    auto header_only = dir.write("h.csv", "date,value\n");
    EXPECT_THROW(load_macro_csv(header_only.string(), "EFFR"), parse_error);
    EXPECT_THROW(load_macro_csv(one.string(), "GDP"), config_error);
    EXPECT_THROW(load_macro_csv((dir.path() / "missing.csv").string(), "EFFR"), io_error);
}

TEST(Align, ForwardFillRepeatsLastValue) {
    macro_series m{"VIX", {{parse_iso_date("2023-01-02"), 21.5}}};
    std::vector<calendar_day> days;
    for (int i = 0; i < 5; ++i) days.push_back(parse_iso_date("2023-01-02") + std::chrono::days{i});
    vec v = forward_fill(m, days);
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(v[i], 21.5);
}

TEST(Align, ForwardFillOfDenseSeriesIsIdentity) {
    macro_series m{"VIX", {}};
    std::vector<calendar_day> days;
    for (int i = 0; i < 20; ++i) {
        days.push_back(parse_iso_date("2023-01-02") + std::chrono::days{i});
        m.points.push_back({days.back(), 10.0 + i * 0.37});
    }
    vec v = forward_fill(m, days);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(v[i], m.points[static_cast<std::size_t>(i)].value);
}

TEST(Align, WarmupDropsFirst26RowsAndKeepsTargetIdentity) {
    temp_dir dir;
    auto p = dir.write("x.csv", ohlc_csv(80));
    auto ohlc = load_ohlc_csv(p.string());
    auto frame = align_and_join(ohlc, dense_macros(dir, ohlc.bars.front().date, 100), compute_indicators(ohlc));

    // Brute force: first row where lag, EMA26-derived MACD, ATR14 and RSI14
    // have all left warm-up, counted from the indicator definitions.
    vec c = ohlc.closes();
    int first_defined = 0;
    vec m = macd(c), a = atr(ohlc.highs(), ohlc.lows(), c), r = rsi(c);
    while (std::isnan(m[first_defined]) || std::isnan(a[first_defined]) || std::isnan(r[first_defined]) || first_defined == 0)
        ++first_defined;
    EXPECT_EQ(first_defined, 26);
    EXPECT_EQ(frame.rows(), 80 - 26);
    EXPECT_EQ(frame.dates.front(), ohlc.bars[26].date);

    for (Eigen::Index t = 0; t < frame.rows(); ++t) {
        const auto src = static_cast<std::size_t>(t + 26);
        EXPECT_EQ(frame.target[t], ohlc.bars[src].close);
        EXPECT_EQ(frame.inputs(t, 0), ohlc.bars[src - 1].close); // strictly previous day
        EXPECT_FALSE(frame.inputs.row(t).array().isNaN().any());
    }
}

TEST(Align, MacroStartingLateIsCoverageError) {
    temp_dir dir;
    auto p = dir.write("x.csv", ohlc_csv(60));
    auto ohlc = load_ohlc_csv(p.string());
    auto macros = dense_macros(dir, ohlc.bars.front().date, 100);
    macros[2].points.erase(macros[2].points.begin(), macros[2].points.begin() + 40);
    EXPECT_THROW(align_and_join(ohlc, macros, compute_indicators(ohlc)), coverage_error);
    macros.pop_back();
    EXPECT_THROW(align_and_join(ohlc, macros, compute_indicators(ohlc)), config_error);
}

TEST(Split, DefaultProtocolLengths) {
    auto f = tiny_frame(600);
    auto [train, test] = split(f, 500, 100);
    EXPECT_EQ(train.rows(), 500);
    EXPECT_EQ(test.rows(), 100);
    EXPECT_LT(train.dates.back(), test.dates.front());
    EXPECT_EQ(train.target[0], f.target[0]);
    EXPECT_EQ(test.target[99], f.target[599]);
}

TEST(Split, InsufficientRowsStatesCounts) {
    auto f = tiny_frame(100);
    try {
        split(f, 500, 100);
        FAIL();
    } catch (const length_error& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("600"), std::string::npos);
        EXPECT_NE(msg.find("100"), std::string::npos);
    }
}

TEST(Split, TwoRows) {
    auto f = tiny_frame(2);
    auto [train, test] = split(f, 1, 1);
    EXPECT_EQ(train.target[0], f.target[0]);
    EXPECT_EQ(test.target[0], f.target[1]);
}

TEST(Split, LongerFrameUsesMostRecentWindow) {
    auto f = tiny_frame(650);
    auto [train, test] = split(f, 500, 100);
    EXPECT_EQ(train.dates.front(), f.dates[50]);
    EXPECT_EQ(test.dates.back(), f.dates.back());
}

TEST(Normalizer, ScalesWithoutClipping) {
    feature_frame train = tiny_frame(3);
    train.inputs.col(0) << 0, 10, 4;
    auto n = fit_normalizer(train);
    feature_frame q = tiny_frame(2);
    q.inputs(0, 0) = 5;
    q.inputs(1, 0) = 12;
    auto s = n.apply(q);
    EXPECT_DOUBLE_EQ(s.inputs(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(s.inputs(1, 0), 1.2);
    auto st = n.apply(train);
    EXPECT_GE(st.inputs.minCoeff(), 0.0);
    EXPECT_LE(st.inputs.maxCoeff(), 1.0);
}

TEST(Normalizer, RoundTripIsIdentity) {
    std::mt19937_64 rng(11);
    feature_frame train = tiny_frame(50);
    train.inputs = test::random_matrix(50, n_features, rng, -500, 4000);
    train.target = test::random_vector(50, rng, 1000, 5000);
    auto n = fit_normalizer(train);
    for (int trial = 0; trial < 20; ++trial) {
        feature_frame f = tiny_frame(10);
        f.inputs = test::random_matrix(10, n_features, rng, -1e4, 1e4);
        f.target = test::random_vector(10, rng, -1e4, 1e4);
        auto back = n.invert(n.apply(f));
        for (Eigen::Index i = 0; i < f.inputs.size(); ++i)
            EXPECT_NEAR(back.inputs.data()[i], f.inputs.data()[i], 1e-12 * std::max(1.0, std::abs(f.inputs.data()[i])));
        for (Eigen::Index i = 0; i < f.target.size(); ++i)
            EXPECT_NEAR(back.target[i], f.target[i], 1e-12 * std::max(1.0, std::abs(f.target[i])));
    }
}

TEST(Normalizer, ConstantColumnIsDegenerate) {
    feature_frame f = tiny_frame(5);
    f.inputs.col(3).setConstant(7);
    try {
        fit_normalizer(f);
        FAIL();
    } catch (const degenerate_error& e) {
        EXPECT_NE(std::string(e.what()).find("UMCSENT"), std::string::npos);
    }
}
