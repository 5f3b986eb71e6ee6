#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chartcast/market_data.hpp"
#include "chartcast/strategy.hpp"

namespace chartcast {

struct TradeRecord {
    HourStamp anchor;
    int direction = 0;
    double entry_price = 0.0;  // close at anchor + entry_offset
    double exit_price = 0.0;   // close at anchor + exit_offset
    double pnl = 0.0;          // exit - entry for long, entry - exit for short
};

struct LedgerResult {
    std::vector<TradeRecord> trades;
    std::size_t dropped = 0;  // anchors whose entry/exit fell outside the series
};

// Long is the positive class throughout.
struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

struct MetricsReport {
    double f1 = 0.0;
    double mcc = 0.0;
    double balanced_acc = 0.0;
    double precision_short = 0.0;  // percent
    double precision_long = 0.0;   // percent
    double pip_short = 0.0;
    double pip_long = 0.0;
    ConfusionCounts counts;
    LabelScheme scheme;
};

// One trade per decision, entry/exit close prices at the scheme's offsets.
LedgerResult build_ledger(std::span<const StrategyDecision> decisions, const OhlcSeries& series,
                          const LabelScheme& scheme);

// Decisions and samples must be aligned one-to-one on the same anchors;
// misalignment is an error.
ConfusionCounts confusion(std::span<const StrategyDecision> decisions,
                          std::span<const LabeledSample> samples, const OhlcSeries& series);

// Index-aligned predictions/labels, used by training-time validation scoring.
ConfusionCounts confusion_from_pairs(std::span<const int> predictions,
                                     std::span<const int> labels);

// Zero-denominator conventions: precisions and F1 report 0 when their
// denominator is empty; MCC reports 0 when any factor of its denominator is
// zero. These reproduce the constant-strategy rows exactly.
double f1_score(const ConfusionCounts& c);
double matthews_correlation(const ConfusionCounts& c);
double balanced_accuracy(const ConfusionCounts& c);

MetricsReport metrics(const ConfusionCounts& counts, std::span<const TradeRecord> ledger,
                      const LabelScheme& scheme = LabelScheme::standard());

std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);

// One aligned Table-style row: F1, MCC, balanced ACC, precisions, pips.
std::string format_metrics_row(const std::string& name, const MetricsReport& report);
std::string metrics_table_header();

}  // namespace chartcast
