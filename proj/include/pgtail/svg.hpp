#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgtail {

// One polyline, optionally with a shaded band (e.g. mean +/- std across
// seeds). x, y, band_lo, band_hi are parallel where present.
struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> band_lo;  // empty = no band
    std::vector<double> band_hi;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 960;
    int height = 540;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Round tick spacing to 1/2/5 times a power of ten.
inline double nice_step(double range, int target_ticks) {
    if (range <= 0.0 || target_ticks <= 0) return 1.0;
    double raw = range / target_ticks;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double frac = raw / mag;
    double nice = frac <= 1.0 ? 1.0 : frac <= 2.0 ? 2.0 : frac <= 5.0 ? 5.0 : 10.0;
    return nice * mag;
}

}  // namespace detail

// Deterministic line-chart emitter: fixed viewBox, fixed palette, element
// order equal to input order, no timestamps or generated identifiers, so
// identical inputs produce byte-identical files.
inline std::string render_line_chart(const ChartSpec& spec,
                                     const std::vector<ChartSeries>& series) {
    using detail::svg_num;
    using detail::xml_escape;
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    constexpr int kPaletteSize = 8;
    const double W = spec.width, H = spec.height;
    const double ml = 72, mr = 24, mt = 40, mb = 52;  // margins
    const double pw = W - ml - mr, ph = H - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const ChartSeries& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("chart: x/y length mismatch");
        if (!s.band_lo.empty() &&
            (s.band_lo.size() != s.x.size() || s.band_hi.size() != s.x.size()))
            throw std::invalid_argument("chart: band length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            double lo = s.band_lo.empty() ? s.y[i] : std::min(s.y[i], s.band_lo[i]);
            double hi = s.band_hi.empty() ? s.y[i] : std::max(s.y[i], s.band_hi[i]);
            if (std::isfinite(lo)) ymin = std::min(ymin, lo);
            if (std::isfinite(hi)) ymax = std::max(ymax, hi);
        }
    }
    if (!std::isfinite(xmin)) {  // nothing plottable
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + (ymin == 0 ? 1 : std::abs(ymin) * 0.1);
    double ypad = (ymax - ymin) * 0.05;
    ymin -= ypad;
    ymax += ypad;

    auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double v) { return mt + (ymax - v) / (ymax - ymin) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + svg_num(W) + " " +
           svg_num(H) + "\" width=\"" + svg_num(W) + "\" height=\"" + svg_num(H) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + svg_num(W) + "\" height=\"" + svg_num(H) +
           "\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + svg_num(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           xml_escape(spec.title) + "</text>\n";

    // Axes and ticks.
    out += "<line x1=\"" + svg_num(ml) + "\" y1=\"" + svg_num(mt + ph) + "\" x2=\"" +
           svg_num(ml + pw) + "\" y2=\"" + svg_num(mt + ph) + "\" stroke=\"#333333\"/>\n";
    out += "<line x1=\"" + svg_num(ml) + "\" y1=\"" + svg_num(mt) + "\" x2=\"" + svg_num(ml) +
           "\" y2=\"" + svg_num(mt + ph) + "\" stroke=\"#333333\"/>\n";
    double xstep = detail::nice_step(xmax - xmin, 6);
    for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-9 * xstep; t += xstep) {
        out += "<line x1=\"" + svg_num(X(t)) + "\" y1=\"" + svg_num(mt + ph) + "\" x2=\"" +
               svg_num(X(t)) + "\" y2=\"" + svg_num(mt + ph + 5) + "\" stroke=\"#333333\"/>\n";
        out += "<text x=\"" + svg_num(X(t)) + "\" y=\"" + svg_num(mt + ph + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               svg_num(t) + "</text>\n";
    }
    double ystep = detail::nice_step(ymax - ymin, 6);
    for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-9 * ystep; t += ystep) {
        out += "<line x1=\"" + svg_num(ml - 5) + "\" y1=\"" + svg_num(Y(t)) + "\" x2=\"" +
               svg_num(ml) + "\" y2=\"" + svg_num(Y(t)) + "\" stroke=\"#333333\"/>\n";
        out += "<text x=\"" + svg_num(ml - 8) + "\" y=\"" + svg_num(Y(t) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + svg_num(t) +
               "</text>\n";
    }
    out += "<text x=\"" + svg_num(ml + pw / 2) + "\" y=\"" + svg_num(H - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           xml_escape(spec.x_label) + "</text>\n";
    out += "<text x=\"18\" y=\"" + svg_num(mt + ph / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
           svg_num(mt + ph / 2) + ")\">" + xml_escape(spec.y_label) + "</text>\n";

    // Bands first so lines draw on top.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const ChartSeries& s = series[si];
        if (s.band_lo.empty() || s.x.empty()) continue;
        const char* color = kPalette[si % kPaletteSize];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += svg_num(X(s.x[i])) + "," + svg_num(Y(s.band_hi[i])) + " ";
        for (std::size_t i = s.x.size(); i-- > 0;)
            pts += svg_num(X(s.x[i])) + "," + svg_num(Y(s.band_lo[i])) + " ";
        out += "<polygon points=\"" + pts + "\" fill=\"" + color +
               "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const ChartSeries& s = series[si];
        if (s.x.empty()) continue;
        const char* color = kPalette[si % kPaletteSize];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += svg_num(X(s.x[i])) + "," + svg_num(Y(s.y[i])) + " ";
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
    }
    // Legend, input order.
    double ly = mt + 10;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % kPaletteSize];
        out += "<line x1=\"" + svg_num(ml + pw - 150) + "\" y1=\"" + svg_num(ly) + "\" x2=\"" +
               svg_num(ml + pw - 126) + "\" y2=\"" + svg_num(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + svg_num(ml + pw - 120) + "\" y=\"" + svg_num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(series[si].label) +
               "</text>\n";
        ly += 18;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace pgtail
