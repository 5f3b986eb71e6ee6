#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chartcast/market_data.hpp"

namespace chartcast {

// One trade decision per labelable anchor hour.
struct StrategyDecision {
    HourStamp anchor;
    int direction = 0;  // 1 long, 0 short
};

// Anchor timestamps for a labeled sample list.
std::vector<HourStamp> anchors_of(const OhlcSeries& series,
                                  std::span<const LabeledSample> samples);

// Fair coin per anchor; the generator is isolated from any training seed.
std::vector<StrategyDecision> random_strategy(std::span<const HourStamp> anchors,
                                              std::uint64_t seed);

std::vector<StrategyDecision> always_long(std::span<const HourStamp> anchors);

std::vector<StrategyDecision> always_short(std::span<const HourStamp> anchors);

}  // namespace chartcast
