#include "chartcast/strategy.hpp"

#include "chartcast/rng.hpp"

namespace chartcast {

std::vector<HourStamp> anchors_of(const OhlcSeries& series,
                                  std::span<const LabeledSample> samples) {
    std::vector<HourStamp> anchors;
    anchors.reserve(samples.size());
    for (const auto& s : samples) anchors.push_back(series[s.anchor_index].ts);
    return anchors;
}

std::vector<StrategyDecision> random_strategy(std::span<const HourStamp> anchors,
                                              std::uint64_t seed) {
    Rng rng(seed);
    std::vector<StrategyDecision> decisions;
    decisions.reserve(anchors.size());
    for (const auto& ts : anchors) {
        decisions.push_back({ts, rng.next_u64() & 1u ? 1 : 0});
    }
    return decisions;
}

std::vector<StrategyDecision> always_long(std::span<const HourStamp> anchors) {
    std::vector<StrategyDecision> decisions;
    decisions.reserve(anchors.size());
    for (const auto& ts : anchors) decisions.push_back({ts, 1});
    return decisions;
}

std::vector<StrategyDecision> always_short(std::span<const HourStamp> anchors) {
    std::vector<StrategyDecision> decisions;
    decisions.reserve(anchors.size());
    for (const auto& ts : anchors) decisions.push_back({ts, 0});
    return decisions;
}

}  // namespace chartcast
