#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "chartcast/market_data.hpp"

namespace chartcast {

using Rgb = std::array<std::uint8_t, 3>;

enum class DashPattern { Solid, Dashed, Dotted };

struct LineStyle {
    int width_px = 1;
    DashPattern dash = DashPattern::Solid;
    Rgb color = {0, 0, 0};

    bool operator==(const LineStyle&) const = default;
};

// Styles keep the four price series visually distinct; the close line is the
// heaviest. Gridlines mark every 20-pip multiple inside the visible range.
struct RenderConfig {
    int width = 224;
    int height = 224;
    int window_hours = 20;
    int margin_px = 6;
    double grid_spacing_pip = 20.0;
    double pad_fraction = 0.05;  // of the window price range, each side
    double flat_pad_pip = 10.0;  // view half-height when the window is flat
    LineStyle close_style = {3, DashPattern::Solid, {0, 0, 0}};
    LineStyle open_style = {1, DashPattern::Solid, {0, 0, 0}};
    LineStyle high_style = {1, DashPattern::Dashed, {0, 0, 0}};
    LineStyle low_style = {1, DashPattern::Dotted, {0, 0, 0}};
    Rgb grid_color = {200, 200, 200};
    Rgb background = {255, 255, 255};

    void validate() const;  // four styles pairwise distinct, sane geometry
};

// Deterministic RGB raster (row-major, 3 bytes per pixel, no anti-aliasing).
struct ChartImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
    HourStamp window_start;
    int window_hours = 0;
    double value_min = 0.0;  // shown pip range, after padding
    double value_max = 0.0;

    Rgb at(int x, int y) const {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
};

// Renders the four price polylines over the gridlines. The window length must
// equal config.window_hours.
ChartImage render_chart(std::span<const OhlcBar> window, const RenderConfig& config);

}  // namespace chartcast
