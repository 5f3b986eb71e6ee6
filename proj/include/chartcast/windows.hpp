#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chartcast/market_data.hpp"

namespace chartcast {

// Model input window shapes. The image kind consumes five 20-bar chart
// windows shifted by one hour, the last one ending at the anchor, so it
// needs 24 bars of history; the others need their nominal length.
enum class WindowKind { Numeric24, Numeric48, Image5x20, Text24 };

std::string window_kind_name(WindowKind kind);

// Bars of history the kind requires, anchor bar included.
std::size_t window_history(WindowKind kind);

// Number of encoder inputs per window (sequence length seen by the LSTM).
std::size_t window_sequence_length(WindowKind kind);

struct ModelWindow {
    std::size_t anchor_index = 0;  // last bar of the window
    std::size_t begin = 0;         // [begin, end) indices into the series
    std::size_t end = 0;
};

struct WindowSet {
    WindowKind kind = WindowKind::Numeric24;
    std::vector<ModelWindow> windows;        // aligned with `kept`
    std::vector<LabeledSample> kept;         // anchors with enough history
    std::vector<std::size_t> dropped;        // anchor indices without history
};

// Windows end at the anchor hour (inclusive); anchors lacking history are
// dropped and reported.
WindowSet make_windows(const OhlcSeries& series, const std::vector<LabeledSample>& anchors,
                       WindowKind kind);

// The five chart sub-windows of an Image5x20 window, oldest first, each
// `chart_bars` long and shifted by one hour.
std::vector<ModelWindow> image_subwindows(const ModelWindow& window, std::size_t chart_bars = 20,
                                          std::size_t count = 5);

}  // namespace chartcast
