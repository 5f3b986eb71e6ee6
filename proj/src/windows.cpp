#include "chartcast/windows.hpp"

#include "chartcast/errors.hpp"

namespace chartcast {

std::string window_kind_name(WindowKind kind) {
    switch (kind) {
        case WindowKind::Numeric24:
            return "numeric24";
        case WindowKind::Numeric48:
            return "numeric48";
        case WindowKind::Image5x20:
            return "image5x20";
        case WindowKind::Text24:
            return "text24";
    }
    throw ConfigError("unknown window kind");
}

std::size_t window_history(WindowKind kind) {
    switch (kind) {
        case WindowKind::Numeric24:
        case WindowKind::Text24:
        case WindowKind::Image5x20:
            return 24;
        case WindowKind::Numeric48:
            return 48;
    }
    throw ConfigError("unknown window kind");
}

std::size_t window_sequence_length(WindowKind kind) {
    switch (kind) {
        case WindowKind::Numeric24:
        case WindowKind::Text24:
            return 24;
        case WindowKind::Numeric48:
            return 48;
        case WindowKind::Image5x20:
            return 5;
    }
    throw ConfigError("unknown window kind");
}

WindowSet make_windows(const OhlcSeries& series, const std::vector<LabeledSample>& anchors,
                       WindowKind kind) {
    const std::size_t need = window_history(kind);
    WindowSet set;
    set.kind = kind;
    for (const auto& sample : anchors) {
        if (sample.anchor_index >= series.size()) {
            throw ValidationError("anchor index " + std::to_string(sample.anchor_index) +
                                  " outside the series");
        }
        if (sample.anchor_index + 1 < need) {
            set.dropped.push_back(sample.anchor_index);
            continue;
        }
        ModelWindow w;
        w.anchor_index = sample.anchor_index;
        w.end = sample.anchor_index + 1;
        w.begin = w.end - need;
        set.windows.push_back(w);
        set.kept.push_back(sample);
    }
    return set;
}

std::vector<ModelWindow> image_subwindows(const ModelWindow& window, std::size_t chart_bars,
                                          std::size_t count) {
    if (window.end - window.begin != chart_bars + count - 1) {
        throw ValidationError("image window span does not fit " + std::to_string(count) + "x" +
                              std::to_string(chart_bars) + " sub-windows");
    }
    std::vector<ModelWindow> subs;
    subs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        ModelWindow sub;
        sub.begin = window.begin + k;
        sub.end = sub.begin + chart_bars;
        sub.anchor_index = sub.end - 1;
        subs.push_back(sub);
    }
    return subs;
}

}  // namespace chartcast
