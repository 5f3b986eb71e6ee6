#include "chartcast/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chartcast/errors.hpp"
#include "chartcast/rng.hpp"

namespace chartcast {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            fields.emplace_back();
            continue;
        }
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_price(const std::string& s, std::size_t row) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ": bad price '" + s + "'");
    }
}

}  // namespace

double quantize_pip(double x) { return std::round(x * 10.0) / 10.0; }

void validate_bar(const OhlcBar& bar) {
    const auto bad = [&](const std::string& what) {
        throw ValidationError("bar at " + bar.ts.to_string() + ": " + what);
    };
    for (double p : {bar.open, bar.high, bar.low, bar.close}) {
        if (!std::isfinite(p) || p <= 0.0) bad("non-finite or non-positive price");
    }
    if (bar.low > std::min(bar.open, bar.close)) bad("low above open/close");
    if (bar.high < std::max(bar.open, bar.close)) bad("high below open/close");
}

void OhlcSeries::validate() const {
    std::string inversions;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        try {
            validate_bar(bars[i]);
        } catch (const ValidationError&) {
            inversions += (inversions.empty() ? "" : ", ") + bars[i].ts.to_string();
        }
        if (i > 0 && bars[i].ts == bars[i - 1].ts) {
            throw ValidationError("duplicate timestamp " + bars[i].ts.to_string());
        }
        if (i > 0 && bars[i].ts < bars[i - 1].ts) {
            throw ValidationError("timestamps not increasing at " + bars[i].ts.to_string());
        }
    }
    if (!inversions.empty()) {
        throw ValidationError("invalid bars at: " + inversions);
    }
}

void SplitSpec::validate() const {
    if (train_fraction <= 0.0 || validation_fraction <= 0.0 || test_fraction <= 0.0) {
        throw ConfigError("split fractions must all be > 0");
    }
    const double sum = train_fraction + validation_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));
    }
}

LabelScheme label_scheme_from_name(const std::string& name) {
    if (name == "standard") return LabelScheme::standard();
    if (name == "delayed") return LabelScheme::delayed();
    std::string hint;
    if (name.rfind("sta", 0) == 0) hint = " (did you mean 'standard'?)";
    if (name.rfind("del", 0) == 0) hint = " (did you mean 'delayed'?)";
    throw ConfigError("unknown label scheme '" + name + "'" + hint);
}

OhlcSeries ingest(const std::filesystem::path& path, InputFormat format) {
    if (format != InputFormat::Csv) throw ConfigError("unsupported input format");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": no rows");

    // Header maps column names to positions; Table-style exports order the
    // prices differently, so the names decide.
    const auto header = split_fields(line);
    int col_ts = -1, col_open = -1, col_high = -1, col_low = -1, col_close = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name = header[i];
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (name == "timestamp" || name == "date and time" || name == "datetime") {
            col_ts = static_cast<int>(i);
        } else if (name == "open") {
            col_open = static_cast<int>(i);
        } else if (name == "high") {
            col_high = static_cast<int>(i);
        } else if (name == "low") {
            col_low = static_cast<int>(i);
        } else if (name == "close") {
            col_close = static_cast<int>(i);
        }
    }
    if (col_ts < 0 || col_open < 0 || col_high < 0 || col_low < 0 || col_close < 0) {
        throw ParseError(path.string() +
                         ": header must name timestamp, open, high, low, close columns");
    }
    const std::size_t need = static_cast<std::size_t>(
        std::max({col_ts, col_open, col_high, col_low, col_close}) + 1);

    OhlcSeries series;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_fields(line);
        if (fields.size() < need) {
            throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(need) +
                             " fields, got " + std::to_string(fields.size()));
        }
        OhlcBar bar;
        try {
            bar.ts = HourStamp::parse(fields[col_ts]);
        } catch (const ParseError& e) {
            throw ParseError("row " + std::to_string(row) + ": " + e.what());
        }
        bar.open = parse_price(fields[col_open], row);
        bar.high = parse_price(fields[col_high], row);
        bar.low = parse_price(fields[col_low], row);
        bar.close = parse_price(fields[col_close], row);
        series.bars.push_back(bar);
    }
    if (series.bars.empty()) throw ParseError(path.string() + ": no rows");

    std::stable_sort(series.bars.begin(), series.bars.end(),
                     [](const OhlcBar& a, const OhlcBar& b) { return a.ts < b.ts; });
    series.validate();
    return series;
}

void write_csv(const OhlcSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "timestamp,open,high,low,close\n";
    char buf[160];
    for (const auto& bar : series.bars) {
        std::snprintf(buf, sizeof(buf), "%s,%.1f,%.1f,%.1f,%.1f\n", bar.ts.to_string().c_str(),
                      bar.open, bar.high, bar.low, bar.close);
        out << buf;
    }
}

SplitResult split(const OhlcSeries& series, const SplitSpec& spec) {
    spec.validate();
    const std::size_t n = series.size();
    if (n < 3) throw ValidationError("series too short to split (need >= 3 bars)");

    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * n));
    const auto n_train_val = static_cast<std::size_t>(
        std::floor((spec.train_fraction + spec.validation_fraction) * n));

    SplitResult result;
    result.train.bars.assign(series.bars.begin(), series.bars.begin() + n_train);
    result.validation.bars.assign(series.bars.begin() + n_train, series.bars.begin() + n_train_val);
    result.test.bars.assign(series.bars.begin() + n_train_val, series.bars.end());
    return result;
}

std::vector<LabeledSample> label(const OhlcSeries& series, const LabelScheme& scheme) {
    std::vector<LabeledSample> samples;
    const std::size_t n = series.size();
    const auto exit_off = static_cast<std::size_t>(scheme.exit_offset);
    if (n <= exit_off) return samples;

    samples.reserve(n - exit_off);
    for (std::size_t t = 0; t + exit_off < n; ++t) {
        LabeledSample s;
        s.anchor_index = t;
        s.delta = series[t + exit_off].close -
                  series[t + static_cast<std::size_t>(scheme.entry_offset)].close;
        s.label = s.delta > 0.0 ? 1 : 0;
        samples.push_back(s);
    }
    return samples;
}

DatasetStatistics statistics(const std::vector<LabeledSample>& samples) {
    if (samples.empty()) throw ValidationError("no samples");
    DatasetStatistics st;
    double sum = 0.0, max_d = samples[0].delta, min_d = samples[0].delta;
    std::size_t positives = 0;
    for (const auto& s : samples) {
        sum += s.delta;
        max_d = std::max(max_d, s.delta);
        min_d = std::min(min_d, s.delta);
        if (s.delta > 0.0) ++positives;
    }
    const double n = static_cast<double>(samples.size());
    st.mean_delta = sum / n;
    st.positive_fraction = 100.0 * static_cast<double>(positives) / n;
    st.max_positive_delta = std::max(0.0, max_d);
    st.max_negative_delta = std::min(0.0, min_d);
    double sq = 0.0;
    for (const auto& s : samples) {
        const double d = s.delta - st.mean_delta;
        sq += d * d;
    }
    st.std_delta = std::sqrt(sq / n);
    return st;
}

OhlcSeries generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_bars < 1) throw ConfigError("n_bars must be >= 1");
    Rng rng(spec.seed);
    OhlcSeries series;
    series.bars.reserve(spec.n_bars);

    double prev_close = spec.start_price;
    for (std::size_t i = 0; i < spec.n_bars; ++i) {
        OhlcBar bar;
        bar.ts = spec.start_ts + static_cast<std::int64_t>(i);
        const double open = prev_close;
        const double close =
            std::max(open + spec.drift + rng.normal() * spec.volatility, spec.start_price * 0.01);
        const double wick_high = std::abs(rng.normal()) * spec.volatility * 0.4;
        const double wick_low = std::abs(rng.normal()) * spec.volatility * 0.4;
        bar.open = quantize_pip(open);
        bar.close = quantize_pip(close);
        bar.high = quantize_pip(std::max(open, close) + wick_high);
        bar.low = quantize_pip(std::max(std::min(open, close) - wick_low, spec.start_price * 0.005));
        // Quantization can nudge high/low inside the body; push them back out.
        bar.high = std::max(bar.high, std::max(bar.open, bar.close));
        bar.low = std::min(bar.low, std::min(bar.open, bar.close));
        prev_close = close;
        series.bars.push_back(bar);
    }
    series.validate();
    return series;
}

void write_labels_jsonl(const OhlcSeries& series, const std::vector<LabeledSample>& samples,
                        const LabelScheme& scheme, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& s : samples) {
        nlohmann::ordered_json j;
        j["anchor_ts"] = series[s.anchor_index].ts.to_string();
        j["scheme"] = scheme.name();
        j["delta"] = s.delta;
        j["label"] = s.label;
        out << j.dump() << "\n";
    }
}

std::string statistics_to_json(const DatasetStatistics& st) {
    nlohmann::ordered_json j;
    j["positive_fraction"] = st.positive_fraction;
    j["max_positive_delta"] = st.max_positive_delta;
    j["max_negative_delta"] = st.max_negative_delta;
    j["mean_delta"] = st.mean_delta;
    j["std_delta"] = st.std_delta;
    j["std_convention"] = "population";
    return j.dump(2);
}

}  // namespace chartcast
