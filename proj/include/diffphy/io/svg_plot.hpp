#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "diffphy/errors.hpp"
#include "diffphy/io/file_io.hpp"

namespace diffphy::io {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace detail

/// Minimal static line plot. The y axis is either linear or log10; the
/// axis type is recorded in the root element's data-axis-y attribute.
/// Non-positive y values are dropped in log mode.
inline std::string render_line_plot_svg(const std::vector<PlotSeries>& series,
                                        const std::string& x_label, const std::string& y_label,
                                        bool y_log) {
    constexpr double width = 640, height = 480;
    constexpr double ml = 70, mr = 20, mt = 20, mb = 50;
    const double plot_w = width - ml - mr;
    const double plot_h = height - mt - mb;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = s.y[i];
            if (y_log && !(y > 0.0)) continue;
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            const double yv = y_log ? std::log10(y) : y;
            y_min = std::min(y_min, yv);
            y_max = std::max(y_max, yv);
        }
    if (!(x_min <= x_max)) {  // nothing plottable
        x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    }
    if (x_min == x_max) x_max = x_min + 1;
    if (y_min == y_max) y_max = y_min + 1;

    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) {
        const double yv = y_log ? std::log10(y) : y;
        return mt + plot_h - (yv - y_min) / (y_max - y_min) * plot_h;
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\" data-axis-x=\"linear\" data-axis-y=\"";
    svg += (y_log ? "log10" : "linear");
    svg += "\">\n";
    svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    // axes
    svg += "<line x1=\"" + detail::fmt1(ml) + "\" y1=\"" + detail::fmt1(mt + plot_h) + "\" x2=\"" +
           detail::fmt1(ml + plot_w) + "\" y2=\"" + detail::fmt1(mt + plot_h) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::fmt1(ml) + "\" y1=\"" + detail::fmt1(mt) + "\" x2=\"" +
           detail::fmt1(ml) + "\" y2=\"" + detail::fmt1(mt + plot_h) + "\" stroke=\"black\"/>\n";
    // ticks (5 per axis)
    for (int i = 0; i <= 4; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 4.0;
        const double px = sx(fx);
        svg += "<line x1=\"" + detail::fmt1(px) + "\" y1=\"" + detail::fmt1(mt + plot_h) +
               "\" x2=\"" + detail::fmt1(px) + "\" y2=\"" + detail::fmt1(mt + plot_h + 5) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::fmt1(px) + "\" y=\"" + detail::fmt1(mt + plot_h + 18) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + detail::fmt_tick(fx) + "</text>\n";
        const double fy = y_min + (y_max - y_min) * i / 4.0;
        const double py = mt + plot_h - plot_h * i / 4.0;
        const std::string label = y_log ? ("1e" + detail::fmt_tick(fy)) : detail::fmt_tick(fy);
        svg += "<text x=\"" + detail::fmt1(ml - 8) + "\" y=\"" + detail::fmt1(py + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + label + "</text>\n";
    }
    svg += "<text x=\"" + detail::fmt1(ml + plot_w / 2) + "\" y=\"" + detail::fmt1(height - 12) +
           "\" font-size=\"13\" text-anchor=\"middle\">" + x_label + "</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::fmt1(mt + plot_h / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           detail::fmt1(mt + plot_h / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (y_log && !(s.y[i] > 0.0)) continue;
            if (!pts.empty()) pts += " ";
            pts += detail::fmt1(sx(s.x[i])) + "," + detail::fmt1(sy(s.y[i]));
        }
        const char* color = palette[si % (sizeof(palette) / sizeof(palette[0]))];
        if (!pts.empty())
            svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"1.5\"/>\n";
        // legend
        const double ly = mt + 16 + 16 * static_cast<double>(si);
        svg += "<line x1=\"" + detail::fmt1(ml + plot_w - 150) + "\" y1=\"" + detail::fmt1(ly - 4) +
               "\" x2=\"" + detail::fmt1(ml + plot_w - 126) + "\" y2=\"" + detail::fmt1(ly - 4) +
               "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + detail::fmt1(ml + plot_w - 120) + "\" y=\"" + detail::fmt1(ly) +
               "\" font-size=\"11\">" + s.label + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline void write_line_plot_svg(const std::vector<PlotSeries>& series, const std::string& x_label,
                                const std::string& y_label, bool y_log,
                                const std::filesystem::path& path) {
    write_file_atomic(path, render_line_plot_svg(series, x_label, y_label, y_log));
}

}  // namespace diffphy::io
