#pragma once

#include <array>
#include <string>

#include "chartcast/market_data.hpp"

namespace chartcast {

// Feature order everywhere in the numeric pipeline: (close, open, high, low).
inline constexpr std::array<const char*, 4> kFeatureNames = {"close", "open", "high", "low"};

inline std::array<double, 4> bar_features(const OhlcBar& bar) {
    return {bar.close, bar.open, bar.high, bar.low};
}

// Per-feature z-score parameters, fitted on the training split only.
struct NormalizationParams {
    std::array<double, 4> mean{};
    std::array<double, 4> std{};
};

// Population mean/std over all training bars; throws ValidationError naming
// the feature when any std is zero.
NormalizationParams fit_normalizer(const OhlcSeries& train);

std::array<double, 4> normalize(const OhlcBar& bar, const NormalizationParams& params);

std::array<double, 4> denormalize(const std::array<double, 4>& z,
                                  const NormalizationParams& params);

}  // namespace chartcast
