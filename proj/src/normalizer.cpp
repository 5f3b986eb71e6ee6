#include "chartcast/normalizer.hpp"

#include <cmath>

#include "chartcast/errors.hpp"

namespace chartcast {

NormalizationParams fit_normalizer(const OhlcSeries& train) {
    if (train.empty()) throw ValidationError("cannot fit normalizer on an empty train set");
    NormalizationParams p;
    const double n = static_cast<double>(train.size());
    for (const auto& bar : train.bars) {
        const auto f = bar_features(bar);
        for (int i = 0; i < 4; ++i) p.mean[i] += f[i];
    }
    for (int i = 0; i < 4; ++i) p.mean[i] /= n;
    for (const auto& bar : train.bars) {
        const auto f = bar_features(bar);
        for (int i = 0; i < 4; ++i) {
            const double d = f[i] - p.mean[i];
            p.std[i] += d * d;
        }
    }
    for (int i = 0; i < 4; ++i) {
        p.std[i] = std::sqrt(p.std[i] / n);
        if (p.std[i] <= 0.0) {
            throw ValidationError(std::string("zero standard deviation on feature '") +
                                  kFeatureNames[i] + "'");
        }
    }
    return p;
}

std::array<double, 4> normalize(const OhlcBar& bar, const NormalizationParams& params) {
    const auto f = bar_features(bar);
    std::array<double, 4> z{};
    for (int i = 0; i < 4; ++i) z[i] = (f[i] - params.mean[i]) / params.std[i];
    return z;
}

std::array<double, 4> denormalize(const std::array<double, 4>& z,
                                  const NormalizationParams& params) {
    std::array<double, 4> f{};
    for (int i = 0; i < 4; ++i) f[i] = z[i] * params.std[i] + params.mean[i];
    return f;
}

}  // namespace chartcast
