#include "chartcast/chart_render.hpp"

#include <algorithm>
#include <cmath>

#include "chartcast/errors.hpp"

namespace chartcast {

namespace {

struct Canvas {
    int width;
    int height;
    std::vector<std::uint8_t>& pixels;

    void set(int x, int y, Rgb c) {
        if (x < 0 || x >= width || y < 0 || y >= height) return;
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        pixels[i] = c[0];
        pixels[i + 1] = c[1];
        pixels[i + 2] = c[2];
    }

    // Stamps a width×width square; integer geometry keeps the raster exact.
    void stamp(int x, int y, int w, Rgb c) {
        const int r = (w - 1) / 2;
        for (int dy = -r; dy <= w - 1 - r; ++dy) {
            for (int dx = -r; dx <= w - 1 - r; ++dx) set(x + dx, y + dy, c);
        }
    }
};

// true when the dash pattern is "on" at step index k along the polyline.
bool dash_on(DashPattern dash, long k) {
    switch (dash) {
        case DashPattern::Solid:
            return true;
        case DashPattern::Dashed:
            return k % 8 < 5;
        case DashPattern::Dotted:
            return k % 4 < 1;
    }
    return true;
}

// Bresenham with a step counter shared across segments so dash phase is
// continuous along the whole polyline.
void draw_segment(Canvas& canvas, int x0, int y0, int x1, int y1, const LineStyle& style,
                  long& step) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    int x = x0, y = y0;
    while (true) {
        if (dash_on(style.dash, step)) canvas.stamp(x, y, style.width_px, style.color);
        ++step;
        if (x == x1 && y == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
}

void draw_polyline(Canvas& canvas, const std::vector<int>& xs, const std::vector<int>& ys,
                   const LineStyle& style) {
    long step = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        draw_segment(canvas, xs[i], ys[i], xs[i + 1], ys[i + 1], style, step);
        // The shared endpoint would be visited twice; rewind one step.
        if (i + 2 < xs.size()) --step;
    }
}

}  // namespace

void RenderConfig::validate() const {
    const std::array<LineStyle, 4> styles = {close_style, open_style, high_style, low_style};
    for (std::size_t i = 0; i < styles.size(); ++i) {
        for (std::size_t j = i + 1; j < styles.size(); ++j) {
            if (styles[i] == styles[j]) {
                throw ConfigError("line styles must be pairwise distinct");
            }
        }
    }
    if (width <= 2 * margin_px + 1 || height <= 2 * margin_px + 1) {
        throw ConfigError("image too small for margins");
    }
    if (window_hours < 2) throw ConfigError("window_hours must be >= 2");
    if (grid_spacing_pip <= 0.0) throw ConfigError("grid_spacing_pip must be > 0");
}

ChartImage render_chart(std::span<const OhlcBar> window, const RenderConfig& config) {
    config.validate();
    if (window.size() != static_cast<std::size_t>(config.window_hours)) {
        throw ValidationError("render window has " + std::to_string(window.size()) +
                              " bars, expected " + std::to_string(config.window_hours));
    }

    double lo = window[0].low, hi = window[0].high;
    for (const auto& bar : window) {
        if (!std::isfinite(bar.high) || !std::isfinite(bar.low)) {
            throw ValidationError("non-finite price in render window");
        }
        lo = std::min(lo, bar.low);
        hi = std::max(hi, bar.high);
    }
    const double range = hi - lo;
    const double pad = range > 0.0 ? config.pad_fraction * range : config.flat_pad_pip;
    const double view_min = lo - pad;
    const double view_max = hi + pad;

    ChartImage image;
    image.width = config.width;
    image.height = config.height;
    image.pixels.assign(static_cast<std::size_t>(config.width) * config.height * 3, 0);
    image.window_start = window[0].ts;
    image.window_hours = config.window_hours;
    image.value_min = view_min;
    image.value_max = view_max;

    for (std::size_t i = 0; i < image.pixels.size(); i += 3) {
        image.pixels[i] = config.background[0];
        image.pixels[i + 1] = config.background[1];
        image.pixels[i + 2] = config.background[2];
    }

    Canvas canvas{config.width, config.height, image.pixels};
    const int plot_x0 = config.margin_px;
    const int plot_y0 = config.margin_px;
    const int plot_w = config.width - 2 * config.margin_px;
    const int plot_h = config.height - 2 * config.margin_px;

    const auto y_of = [&](double price) {
        const double rel = (view_max - price) / (view_max - view_min);
        return plot_y0 + static_cast<int>(std::lround(rel * (plot_h - 1)));
    };
    const auto x_of = [&](std::size_t i) {
        return plot_x0 + static_cast<int>(std::lround(static_cast<double>(i) * (plot_w - 1) /
                                                      static_cast<double>(window.size() - 1)));
    };

    // Gridlines at every grid_spacing multiple inside the padded view.
    const double spacing = config.grid_spacing_pip;
    const long k_first = static_cast<long>(std::ceil(view_min / spacing - 1e-9));
    const long k_last = static_cast<long>(std::floor(view_max / spacing + 1e-9));
    for (long k = k_first; k <= k_last; ++k) {
        const int y = y_of(static_cast<double>(k) * spacing);
        for (int x = plot_x0; x < plot_x0 + plot_w; ++x) canvas.set(x, y, config.grid_color);
    }

    std::vector<int> xs(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) xs[i] = x_of(i);

    // Draw order: low, high, open, close — the close line ends up on top.
    const std::array<std::pair<const LineStyle*, double OhlcBar::*>, 4> series = {{
        {&config.low_style, &OhlcBar::low},
        {&config.high_style, &OhlcBar::high},
        {&config.open_style, &OhlcBar::open},
        {&config.close_style, &OhlcBar::close},
    }};
    std::vector<int> ys(window.size());
    for (const auto& [style, member] : series) {
        for (std::size_t i = 0; i < window.size(); ++i) ys[i] = y_of(window[i].*member);
        draw_polyline(canvas, xs, ys, *style);
    }
    return image;
}

}  // namespace chartcast
