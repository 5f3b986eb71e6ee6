#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chartcast/hour_stamp.hpp"

namespace chartcast {

// Rounds to the 0.1-pip price grid; the result survives a one-decimal
// print/parse round trip bit-exactly.
double quantize_pip(double x);

// One hour of market data; prices in pip. Prices carry 0.1-pip resolution
// (one decimal place), the feed's native precision.
struct OhlcBar {
    HourStamp ts;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;

    bool operator==(const OhlcBar&) const = default;
};

// high >= max(open, close), low <= min(open, close), all prices finite and > 0.
// Throws ValidationError naming the timestamp otherwise.
void validate_bar(const OhlcBar& bar);

struct OhlcSeries {
    std::vector<OhlcBar> bars;

    std::size_t size() const { return bars.size(); }
    bool empty() const { return bars.empty(); }
    const OhlcBar& operator[](std::size_t i) const { return bars[i]; }

    // Strictly increasing timestamps (gaps allowed), every bar valid.
    void validate() const;
};

struct SplitSpec {
    double train_fraction = 0.6;
    double validation_fraction = 0.2;
    double test_fraction = 0.2;

    void validate() const;  // fractions > 0 and summing to 1
};

struct SplitResult {
    OhlcSeries train;
    OhlcSeries validation;
    OhlcSeries test;
};

enum class LabelVariant { Standard, Delayed };

// Entry/exit hour offsets relative to the anchor. Standard compares
// close[t] with close[t+6]; Delayed compares close[t+1] with close[t+7].
struct LabelScheme {
    LabelVariant variant = LabelVariant::Standard;
    int entry_offset = 0;
    int exit_offset = 6;

    static LabelScheme standard() { return {LabelVariant::Standard, 0, 6}; }
    static LabelScheme delayed() { return {LabelVariant::Delayed, 1, 7}; }

    std::string name() const { return variant == LabelVariant::Standard ? "standard" : "delayed"; }
    int hold_hours() const { return exit_offset - entry_offset; }
};

LabelScheme label_scheme_from_name(const std::string& name);

struct LabeledSample {
    std::size_t anchor_index = 0;
    int label = 0;       // 1 long, 0 short; delta == 0 maps to 0
    double delta = 0.0;  // close[anchor+exit] - close[anchor+entry], pip
};

struct DatasetStatistics {
    double positive_fraction = 0.0;   // percent of samples with delta > 0
    double max_positive_delta = 0.0;  // clamped to >= 0 when no positive delta exists
    double max_negative_delta = 0.0;  // clamped to <= 0 when no negative delta exists
    double mean_delta = 0.0;
    double std_delta = 0.0;  // population standard deviation
};

enum class InputFormat { Csv };

// Reads an OHLC CSV. The header row names the columns (timestamp plus the four
// prices in any order); rows are sorted by timestamp before validation.
OhlcSeries ingest(const std::filesystem::path& path, InputFormat format = InputFormat::Csv);

// Canonical on-disk form: header "timestamp,open,high,low,close", one decimal.
void write_csv(const OhlcSeries& series, const std::filesystem::path& path);

// Chronological partition; |train| = floor(train_fraction * N),
// |train|+|validation| = floor((train_fraction+validation_fraction) * N).
SplitResult split(const OhlcSeries& series, const SplitSpec& spec);

// One sample per anchor t with t + exit_offset in bounds. Shorter series
// yield an empty list.
std::vector<LabeledSample> label(const OhlcSeries& series, const LabelScheme& scheme);

DatasetStatistics statistics(const std::vector<LabeledSample>& samples);

struct SyntheticSpec {
    std::uint64_t seed = 0;
    std::size_t n_bars = 0;
    double volatility = 20.0;  // pip, hourly close-to-close scale
    double start_price = 10000.0;
    double drift = 0.0;  // pip per hour; > 0 models the long bias of index data
    HourStamp start_ts = HourStamp::from_civil(2020, 1, 6, 0);
};

// Deterministic seeded random walk quantized to 0.1 pip.
OhlcSeries generate_synthetic(const SyntheticSpec& spec);

inline OhlcSeries generate_synthetic(std::uint64_t seed, std::size_t n_bars,
                                     double volatility = 20.0) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.n_bars = n_bars;
    spec.volatility = volatility;
    spec.drift = 0.025 * volatility;  // slight long bias; zero volatility stays flat
    return generate_synthetic(spec);
}

// JSON-lines {anchor_ts, scheme, delta, label}, one line per sample.
void write_labels_jsonl(const OhlcSeries& series, const std::vector<LabeledSample>& samples,
                        const LabelScheme& scheme, const std::filesystem::path& path);

std::string statistics_to_json(const DatasetStatistics& stats);

}  // namespace chartcast
