#include "drmpi/envs.hpp"
#include "drmpi/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace drmpi {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (const char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

// Round-ish tick positions: lo, midpoints, hi.
std::vector<double> ticks(double lo, double hi, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(lo + (hi - lo) * i / (count - 1));
    }
    return out;
}

constexpr const char* kSeriesColors[] = {"#1f6f8b", "#c1403d", "#3a7d44",
                                         "#8856a7", "#b8860b", "#444444"};

} // namespace

void emit_svg_curves(const std::string& csv_path, const std::vector<std::string>& columns,
                     const std::string& out_path, bool log_y) {
    if (columns.empty()) {
        throw std::invalid_argument("emit_svg_curves: no columns requested");
    }
    std::istringstream in(read_text_file(csv_path));
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("emit_svg_curves: empty CSV: " + csv_path);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) {
        throw std::invalid_argument("emit_svg_curves: CSV has no header columns");
    }

    std::vector<std::size_t> picks;
    for (const std::string& name : columns) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw std::invalid_argument("emit_svg_curves: column '" + name + "' not in " +
                                        csv_path);
        }
        picks.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    // x is always the first CSV column.
    std::vector<double> xs;
    std::vector<std::vector<double>> series(picks.size());
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            throw std::invalid_argument("emit_svg_curves: short CSV row");
        }
        xs.push_back(std::stod(cells[0]));
        for (std::size_t i = 0; i < picks.size(); ++i) {
            double y = std::stod(cells[picks[i]]);
            if (log_y) y = std::log10(std::max(y, 1e-300));
            series[i].push_back(y);
        }
    }

    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    if (!xs.empty()) {
        x_lo = *std::min_element(xs.begin(), xs.end());
        x_hi = *std::max_element(xs.begin(), xs.end());
        y_lo = std::numeric_limits<double>::infinity();
        y_hi = -std::numeric_limits<double>::infinity();
        for (const auto& ys : series) {
            for (const double y : ys) {
                if (std::isfinite(y)) {
                    y_lo = std::min(y_lo, y);
                    y_hi = std::max(y_hi, y);
                }
            }
        }
        if (!std::isfinite(y_lo)) {
            y_lo = 0.0;
            y_hi = 1.0;
        }
    }
    if (x_hi == x_lo) x_hi = x_lo + 1.0;
    if (y_hi == y_lo) y_hi = y_lo + 1.0;

    constexpr double kW = 720.0, kH = 440.0;
    constexpr double kL = 70.0, kR = 20.0, kT = 20.0, kB = 50.0;
    const double plot_w = kW - kL - kR;
    const double plot_h = kH - kT - kB;
    const auto sx = [&](double x) { return kL + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    const auto sy = [&](double y) { return kT + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    svg << "  <rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    svg << "  <g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">\n";

    // Axes.
    svg << "    <line x1=\"" << kL << "\" y1=\"" << kT + plot_h << "\" x2=\"" << kL + plot_w
        << "\" y2=\"" << kT + plot_h << "\" stroke=\"#222\"/>\n";
    svg << "    <line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\""
        << kT + plot_h << "\" stroke=\"#222\"/>\n";
    for (const double x : ticks(x_lo, x_hi, 5)) {
        svg << "    <line x1=\"" << sx(x) << "\" y1=\"" << kT + plot_h << "\" x2=\"" << sx(x)
            << "\" y2=\"" << kT + plot_h + 5 << "\" stroke=\"#222\"/>\n";
        svg << "    <text x=\"" << sx(x) << "\" y=\"" << kT + plot_h + 20
            << "\" text-anchor=\"middle\">" << xml_escape(num(x)) << "</text>\n";
    }
    for (const double y : ticks(y_lo, y_hi, 5)) {
        svg << "    <line x1=\"" << kL - 5 << "\" y1=\"" << sy(y) << "\" x2=\"" << kL
            << "\" y2=\"" << sy(y) << "\" stroke=\"#222\"/>\n";
        svg << "    <text x=\"" << kL - 8 << "\" y=\"" << sy(y) + 4
            << "\" text-anchor=\"end\">" << xml_escape(num(y)) << "</text>\n";
    }
    svg << "    <text x=\"" << kL + plot_w / 2 << "\" y=\"" << kH - 10
        << "\" text-anchor=\"middle\">" << xml_escape(header[0]) << "</text>\n";
    if (log_y) {
        svg << "    <text x=\"18\" y=\"" << kT + plot_h / 2
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << kT + plot_h / 2
            << ")\">log10 value</text>\n";
    }

    // Series polylines.
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kSeriesColors[i % (sizeof(kSeriesColors) / sizeof(*kSeriesColors))];
        if (!xs.empty()) {
            svg << "    <polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t k = 0; k < xs.size(); ++k) {
                svg << num(sx(xs[k])) << ',' << num(sy(series[i][k]));
                if (k + 1 < xs.size()) svg << ' ';
            }
            svg << "\"/>\n";
        }
        // Legend row.
        const double ly = kT + 14 + 18 * static_cast<double>(i);
        svg << "    <line x1=\"" << kL + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
            << kL + plot_w - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "    <text x=\"" << kL + plot_w - 120 << "\" y=\"" << ly + 4 << "\">"
            << xml_escape(columns[i]) << "</text>\n";
    }

    svg << "  </g>\n</svg>\n";
    write_text_file(out_path, svg.str());
}

} // namespace drmpi
