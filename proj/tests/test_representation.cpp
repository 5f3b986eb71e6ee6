#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "chartcast/chart_render.hpp"
#include "chartcast/errors.hpp"
#include "chartcast/normalizer.hpp"
#include "chartcast/png_io.hpp"
#include "chartcast/rng.hpp"
#include "chartcast/text_record.hpp"
#include "chartcast/windows.hpp"

using namespace chartcast;

namespace {

OhlcBar make_bar(int year, int month, int day, int hour, double c, double o, double h, double l) {
    OhlcBar bar;
    bar.ts = HourStamp::from_civil(year, month, day, hour);
    bar.close = c;
    bar.open = o;
    bar.high = h;
    bar.low = l;
    return bar;
}

OhlcBar random_bar(Rng& rng) {
    const double base = 500.0 + rng.below(30000) / 2.0;
    const double open = quantize_pip(base + rng.below(200) / 10.0);
    const double close = quantize_pip(base + rng.below(200) / 10.0);
    const double high = quantize_pip(std::max(open, close) + rng.below(100) / 10.0);
    const double low = quantize_pip(std::min(open, close) - rng.below(100) / 10.0);
    OhlcBar bar;
    bar.ts = HourStamp::from_civil(1990 + static_cast<int>(rng.below(60)),
                                   1 + static_cast<int>(rng.below(12)),
                                   1 + static_cast<int>(rng.below(28)),
                                   static_cast<int>(rng.below(24)));
    bar.open = open;
    bar.close = close;
    bar.high = high;
    bar.low = low;
    return bar;
}

// Streaming (Welford) mean/std oracle, independent of fit_normalizer's
// two-pass route.
void welford_oracle(const OhlcSeries& series, std::array<double, 4>& mean,
                    std::array<double, 4>& stddev) {
    std::array<double, 4> m{}, m2{};
    double n = 0;
    for (const auto& bar : series.bars) {
        ++n;
        const auto f = bar_features(bar);
        for (int i = 0; i < 4; ++i) {
            const double d = f[i] - m[i];
            m[i] += d / n;
            m2[i] += d * (f[i] - m[i]);
        }
    }
    for (int i = 0; i < 4; ++i) {
        mean[i] = m[i];
        stddev[i] = std::sqrt(m2[i] / n);
    }
}

std::vector<OhlcBar> flat_window(std::size_t n, double price) {
    std::vector<OhlcBar> bars;
    for (std::size_t i = 0; i < n; ++i) {
        bars.push_back(make_bar(2020, 4, 21, static_cast<int>(i % 24), price, price, price, price));
    }
    return bars;
}

// Rows that still contain grid-colored pixels after the polylines were drawn.
std::set<int> gridline_rows(const ChartImage& image, const RenderConfig& config) {
    std::set<int> rows;
    for (int y = 0; y < image.height; ++y) {
        int gray = 0;
        for (int x = 0; x < image.width; ++x) {
            if (image.at(x, y) == config.grid_color) ++gray;
        }
        if (gray >= 10) rows.insert(y);
    }
    return rows;
}

}  // namespace

TEST_CASE("normalizer fit and apply") {
    SUBCASE("constant series reports the zero-std feature") {
        OhlcSeries series;
        series.bars = flat_window(10, 42.0);
        CHECK_THROWS_WITH_AS(fit_normalizer(series), doctest::Contains("close"), ValidationError);
    }
    SUBCASE("two-point population std") {
        OhlcSeries series;
        series.bars.push_back(make_bar(2020, 1, 1, 0, 10, 10, 10, 10));
        series.bars.push_back(make_bar(2020, 1, 1, 1, 20, 20, 20, 20));
        const auto p = fit_normalizer(series);
        for (int i = 0; i < 4; ++i) {
            CHECK(p.mean[i] == doctest::Approx(15.0));
            CHECK(p.std[i] == doctest::Approx(5.0));
        }
    }
    SUBCASE("matches the streaming oracle on synthetic data") {
        const auto series = generate_synthetic(7, 3000);
        const auto p = fit_normalizer(series);
        std::array<double, 4> mean{}, stddev{};
        welford_oracle(series, mean, stddev);
        for (int i = 0; i < 4; ++i) {
            CHECK(p.mean[i] == doctest::Approx(mean[i]).epsilon(1e-12));
            CHECK(p.std[i] == doctest::Approx(stddev[i]).epsilon(1e-12));
        }
    }
    SUBCASE("identity cases and round trip") {
        OhlcSeries series = generate_synthetic(3, 100);
        const auto p = fit_normalizer(series);
        OhlcBar mean_bar;
        mean_bar.close = p.mean[0];
        mean_bar.open = p.mean[1];
        mean_bar.high = p.mean[2];
        mean_bar.low = p.mean[3];
        for (double z : normalize(mean_bar, p)) CHECK(z == doctest::Approx(0.0).epsilon(1e-12));

        OhlcBar shifted;
        shifted.close = p.mean[0] + p.std[0];
        shifted.open = p.mean[1] + p.std[1];
        shifted.high = p.mean[2] + p.std[2];
        shifted.low = p.mean[3] + p.std[3];
        for (double z : normalize(shifted, p)) CHECK(z == doctest::Approx(1.0).epsilon(1e-12));

        const auto bar = series[17];
        const auto recovered = denormalize(normalize(bar, p), p);
        const auto original = bar_features(bar);
        for (int i = 0; i < 4; ++i) {
            CHECK(recovered[i] == doctest::Approx(original[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("text serialization matches the reference strings") {
    const auto r1 = serialize_text(make_bar(2020, 4, 21, 22, 10298.7, 10282.5, 10306.1, 10277.4));
    CHECK(r1.text == "Date:21/04/2020 Time:22 Close:10298.7 Open:10282.5 High:10306.1 Low:10277.4");
    const auto r2 = serialize_text(make_bar(2020, 4, 21, 23, 10316.0, 10301.4, 10320.8, 10300.5));
    CHECK(r2.text == "Date:21/04/2020 Time:23 Close:10316.0 Open:10301.4 High:10320.8 Low:10300.5");
    CHECK(parse_text(r1) == make_bar(2020, 4, 21, 22, 10298.7, 10282.5, 10306.1, 10277.4));
}

TEST_CASE("text parse/serialize identity on random bars") {
    Rng rng(1234);
    for (int i = 0; i < 2000; ++i) {
        const auto bar = random_bar(rng);
        const auto record = serialize_text(bar);
        const auto back = parse_text(record);
        CHECK(back == bar);
        CHECK(serialize_text(back).text == record.text);
    }
    CHECK_THROWS_AS(parse_text(TextRecord{"Close:1.0 Date:21/04/2020"}), ParseError);
    CHECK_THROWS_AS(parse_text(TextRecord{""}), ParseError);
}

TEST_CASE("chart renderer") {
    RenderConfig config;
    config.window_hours = 20;

    SUBCASE("rejects wrong window length") {
        const auto bars = flat_window(19, 10000.0);
        CHECK_THROWS_AS(render_chart(bars, config), ValidationError);
    }

    SUBCASE("flat window leaves one or two gridlines") {
        // Off-grid price: the 20-pip view [10297, 10317] holds one multiple.
        const auto one = render_chart(flat_window(20, 10307.0), config);
        CHECK(gridline_rows(one, config).size() == 1);
        // On a half-phase price the padded view ends on two multiples.
        const auto two = render_chart(flat_window(20, 10310.0), config);
        CHECK(gridline_rows(two, config).size() == 2);
    }

    SUBCASE("rendering twice is byte-identical") {
        OhlcSeries series = generate_synthetic(21, 20);
        const auto a = render_chart(series.bars, config);
        const auto b = render_chart(series.bars, config);
        CHECK(a.pixels == b.pixels);
        CHECK(encode_png(a) == encode_png(b));
    }

    SUBCASE("gridlines land on every 20-pip multiple in view") {
        // Window spanning exactly 10000..10060 pip.
        std::vector<OhlcBar> bars = flat_window(20, 10030.0);
        for (std::size_t i = 0; i < bars.size(); ++i) {
            const double c = 10000.0 + 60.0 * (static_cast<double>(i) / 19.0);
            bars[i].open = bars[i].close = c;
            bars[i].high = c;
            bars[i].low = c;
        }
        bars[0].low = 10000.0;
        bars[0].open = bars[0].close = bars[0].high = 10000.0;
        bars[19].high = 10060.0;
        bars[19].open = bars[19].close = bars[19].low = 10060.0;
        const auto image = render_chart(bars, config);
        CHECK(image.value_min == doctest::Approx(9997.0));
        CHECK(image.value_max == doctest::Approx(10063.0));

        const auto rows = gridline_rows(image, config);
        REQUIRE(rows.size() == 4);
        // Independent pixel-position oracle for the four expected lines.
        const int plot_h = config.height - 2 * config.margin_px;
        for (double g : {10000.0, 10020.0, 10040.0, 10060.0}) {
            const double rel = (image.value_max - g) / (image.value_max - image.value_min);
            const int y = config.margin_px + static_cast<int>(std::lround(rel * (plot_h - 1)));
            CHECK(rows.count(y) == 1);
        }
    }

    SUBCASE("shifting prices by a gridline period leaves the raster unchanged") {
        OhlcSeries series = generate_synthetic(33, 20, 15.0);
        auto shifted = series;
        for (auto& bar : shifted.bars) {
            bar.open += 20.0;
            bar.high += 20.0;
            bar.low += 20.0;
            bar.close += 20.0;
        }
        const auto a = render_chart(series.bars, config);
        const auto b = render_chart(shifted.bars, config);
        CHECK(a.pixels == b.pixels);
    }

    SUBCASE("distinct styles are enforced") {
        RenderConfig bad = config;
        bad.open_style = bad.close_style;
        const auto bars = flat_window(20, 10000.0);
        CHECK_THROWS_AS(render_chart(bars, bad), ConfigError);
    }
}

TEST_CASE("png encode/read round trip") {
    OhlcSeries series = generate_synthetic(5, 20);
    RenderConfig config;
    const auto image = render_chart(series.bars, config);
    const auto path = std::filesystem::temp_directory_path() / "chartcast_tests" / "chart.png";
    std::filesystem::create_directories(path.parent_path());
    write_png(image, path);
    const auto back = read_png(path);
    CHECK(back.width == image.width);
    CHECK(back.height == image.height);
    CHECK(back.pixels == image.pixels);
}

TEST_CASE("window construction") {
    const auto series = generate_synthetic(9, 30);
    const auto samples = label(series, LabelScheme::standard());  // anchors 0..23

    SUBCASE("numeric24 boundary anchor") {
        const auto set = make_windows(series, samples, WindowKind::Numeric24);
        REQUIRE(set.windows.size() == 1);  // only anchor 23 has 24 bars of history
        CHECK(set.windows[0].anchor_index == 23);
        CHECK(set.windows[0].begin == 0);
        CHECK(set.windows[0].end == 24);
        CHECK(set.dropped.size() == samples.size() - 1);
    }

    SUBCASE("image windows enumerate the five shifted sub-windows") {
        const auto set = make_windows(series, samples, WindowKind::Image5x20);
        REQUIRE(!set.windows.empty());
        const auto subs = image_subwindows(set.windows[0]);
        REQUIRE(subs.size() == 5);
        const std::size_t expected_begin[5] = {0, 1, 2, 3, 4};
        for (std::size_t k = 0; k < 5; ++k) {
            CHECK(subs[k].begin == expected_begin[k]);
            CHECK(subs[k].end == expected_begin[k] + 20);
        }
        CHECK(subs.back().end == set.windows[0].anchor_index + 1);
    }

    SUBCASE("insufficient history is dropped and reported") {
        std::vector<LabeledSample> anchors = {{5, 1, 1.0}};
        const auto set = make_windows(series, anchors, WindowKind::Numeric24);
        CHECK(set.windows.empty());
        REQUIRE(set.dropped.size() == 1);
        CHECK(set.dropped[0] == 5);
    }

    SUBCASE("window/label alignment invariant") {
        for (const auto kind : {WindowKind::Numeric24, WindowKind::Numeric48, WindowKind::Text24,
                                WindowKind::Image5x20}) {
            const auto set = make_windows(series, samples, kind);
            REQUIRE(set.windows.size() == set.kept.size());
            for (std::size_t i = 0; i < set.windows.size(); ++i) {
                CHECK(set.windows[i].anchor_index == set.kept[i].anchor_index);
                CHECK(set.windows[i].end == set.windows[i].anchor_index + 1);
                CHECK(set.windows[i].end - set.windows[i].begin == window_history(kind));
            }
        }
    }
}
