#include "chartcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "chartcast/errors.hpp"

namespace chartcast {

namespace {

// Index of the bar with the given timestamp, or npos.
std::size_t index_of(const OhlcSeries& series, HourStamp ts) {
    const auto it = std::lower_bound(
        series.bars.begin(), series.bars.end(), ts,
        [](const OhlcBar& bar, HourStamp t) { return bar.ts < t; });
    if (it == series.bars.end() || it->ts != ts) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(it - series.bars.begin());
}

}  // namespace

LedgerResult build_ledger(std::span<const StrategyDecision> decisions, const OhlcSeries& series,
                          const LabelScheme& scheme) {
    LedgerResult result;
    result.trades.reserve(decisions.size());
    for (const auto& d : decisions) {
        const std::size_t anchor = index_of(series, d.anchor);
        if (anchor == static_cast<std::size_t>(-1) ||
            anchor + static_cast<std::size_t>(scheme.exit_offset) >= series.size()) {
            ++result.dropped;
            continue;
        }
        TradeRecord trade;
        trade.anchor = d.anchor;
        trade.direction = d.direction;
        trade.entry_price = series[anchor + static_cast<std::size_t>(scheme.entry_offset)].close;
        trade.exit_price = series[anchor + static_cast<std::size_t>(scheme.exit_offset)].close;
        trade.pnl = d.direction == 1 ? trade.exit_price - trade.entry_price
                                     : trade.entry_price - trade.exit_price;
        result.trades.push_back(trade);
    }
    return result;
}

ConfusionCounts confusion(std::span<const StrategyDecision> decisions,
                          std::span<const LabeledSample> samples, const OhlcSeries& series) {
    if (decisions.size() != samples.size()) {
        throw ValidationError("confusion: " + std::to_string(decisions.size()) +
                              " decisions vs " + std::to_string(samples.size()) + " labels");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (decisions[i].anchor != series[samples[i].anchor_index].ts) {
            throw ValidationError("confusion: misaligned anchor at position " + std::to_string(i));
        }
        const int pred = decisions[i].direction;
        const int truth = samples[i].label;
        if (pred == 1 && truth == 1) ++c.tp;
        if (pred == 1 && truth == 0) ++c.fp;
        if (pred == 0 && truth == 0) ++c.tn;
        if (pred == 0 && truth == 1) ++c.fn;
    }
    return c;
}

ConfusionCounts confusion_from_pairs(std::span<const int> predictions,
                                     std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw ValidationError("confusion: prediction/label length mismatch");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == 1 && labels[i] == 1) ++c.tp;
        if (predictions[i] == 1 && labels[i] == 0) ++c.fp;
        if (predictions[i] == 0 && labels[i] == 0) ++c.tn;
        if (predictions[i] == 0 && labels[i] == 1) ++c.fn;
    }
    return c;
}

double f1_score(const ConfusionCounts& c) {
    const double denom = static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp + c.fn);
    return denom > 0.0 ? static_cast<double>(c.tp) / denom : 0.0;
}

double matthews_correlation(const ConfusionCounts& c) {
    const double pp = static_cast<double>(c.tp + c.fp);
    const double ap = static_cast<double>(c.tp + c.fn);
    const double an = static_cast<double>(c.tn + c.fp);
    const double pn = static_cast<double>(c.tn + c.fn);
    if (pp == 0.0 || ap == 0.0 || an == 0.0 || pn == 0.0) return 0.0;
    const double num = static_cast<double>(c.tp) * static_cast<double>(c.tn) -
                       static_cast<double>(c.fp) * static_cast<double>(c.fn);
    return num / std::sqrt(pp * ap * an * pn);
}

double balanced_accuracy(const ConfusionCounts& c) {
    const double sensitivity =
        c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    const double specificity =
        c.tn + c.fp > 0 ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;
    return 0.5 * (sensitivity + specificity);
}

MetricsReport metrics(const ConfusionCounts& counts, std::span<const TradeRecord> ledger,
                      const LabelScheme& scheme) {
    MetricsReport r;
    r.counts = counts;
    r.scheme = scheme;
    r.f1 = f1_score(counts);
    r.mcc = matthews_correlation(counts);
    r.balanced_acc = balanced_accuracy(counts);
    r.precision_long =
        counts.tp + counts.fp > 0
            ? 100.0 * static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp)
            : 0.0;
    r.precision_short =
        counts.tn + counts.fn > 0
            ? 100.0 * static_cast<double>(counts.tn) / static_cast<double>(counts.tn + counts.fn)
            : 0.0;
    for (const auto& trade : ledger) {
        if (trade.direction == 1) {
            r.pip_long += trade.pnl;
        } else {
            r.pip_short += trade.pnl;
        }
    }
    return r;
}

std::string metrics_to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["f1"] = r.f1;
    j["mcc"] = r.mcc;
    j["balanced_acc"] = r.balanced_acc;
    j["precision_short"] = r.precision_short;
    j["precision_long"] = r.precision_long;
    j["pip_short"] = r.pip_short;
    j["pip_long"] = r.pip_long;
    j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn},
                   {"fn", r.counts.fn}};
    j["scheme"] = r.scheme.name();
    return j.dump(2);
}

MetricsReport metrics_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.f1 = j.at("f1").get<double>();
    r.mcc = j.at("mcc").get<double>();
    r.balanced_acc = j.at("balanced_acc").get<double>();
    r.precision_short = j.at("precision_short").get<double>();
    r.precision_long = j.at("precision_long").get<double>();
    r.pip_short = j.at("pip_short").get<double>();
    r.pip_long = j.at("pip_long").get<double>();
    r.counts.tp = j.at("counts").at("tp").get<std::int64_t>();
    r.counts.fp = j.at("counts").at("fp").get<std::int64_t>();
    r.counts.tn = j.at("counts").at("tn").get<std::int64_t>();
    r.counts.fn = j.at("counts").at("fn").get<std::int64_t>();
    r.scheme = label_scheme_from_name(j.at("scheme").get<std::string>());
    return r;
}

std::string metrics_table_header() {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-30s %6s %6s %9s %12s %12s %14s %14s", "Models", "F1", "MCC",
                  "Bal. ACC", "Prec (Short)", "Prec (Long)", "Pip (Short)", "Pip (Long)");
    return buf;
}

std::string format_metrics_row(const std::string& name, const MetricsReport& r) {
    char buf[240];
    std::snprintf(buf, sizeof(buf), "%-30s %6.2f %6.2f %9.2f %12.2f %12.2f %14.2f %14.2f",
                  name.c_str(), r.f1, r.mcc, r.balanced_acc, r.precision_short, r.precision_long,
                  r.pip_short, r.pip_long);
    return buf;
}

}  // namespace chartcast
