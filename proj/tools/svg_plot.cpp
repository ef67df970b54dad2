#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "csv.hpp"

namespace qdyn::cli {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void emit_plot(const std::filesystem::path& csv_path, const std::vector<std::string>& columns,
               const PlotStyle& style, const std::filesystem::path& svg_path) {
    const Table table = read_csv(csv_path);
    if (columns.empty()) throw ArgumentError("emit_plot: no columns requested");
    if (table.rows.empty()) throw ArgumentError("emit_plot: no data rows in " + csv_path.string());

    std::vector<int> idx;
    for (const auto& name : columns) {
        const int i = table.column_index(name);
        if (i < 0) throw ArgumentError("emit_plot: column '" + name + "' not in " + csv_path.string());
        idx.push_back(i);
    }

    double x_min = table.rows.front()[0], x_max = x_min;
    double y_min = table.rows.front()[idx[0]], y_max = y_min;
    for (const auto& row : table.rows) {
        x_min = std::min(x_min, row[0]);
        x_max = std::max(x_max, row[0]);
        for (int i : idx) {
            y_min = std::min(y_min, row[i]);
            y_max = std::max(y_max, row[i]);
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double left = 62, right = 18, top = 34, bottom = 44;
    const double w = style.width - left - right;
    const double h = style.height - top - bottom;
    const auto x_of = [&](double x) { return left + w * (x - x_min) / (x_max - x_min); };
    const auto y_of = [&](double y) { return top + h * (1.0 - (y - y_min) / (y_max - y_min)); };

    std::ofstream out(svg_path);
    if (!out) throw ArgumentError("emit_plot: cannot open " + svg_path.string());

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << style.width << " "
        << style.height << "\" width=\"" << style.width << "\" height=\"" << style.height
        << "\">\n";
    out << "<rect width=\"" << style.width << "\" height=\"" << style.height
        << "\" fill=\"white\"/>\n";
    if (!style.title.empty()) {
        out << "<text x=\"" << style.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"14\">"
            << style.title << "</text>\n";
    }

    // frame and ticks
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double xv = x_min + (x_max - x_min) * t / 5.0;
        const double yv = y_min + (y_max - y_min) * t / 5.0;
        out << "<line x1=\"" << fmt(x_of(xv)) << "\" y1=\"" << top + h << "\" x2=\""
            << fmt(x_of(xv)) << "\" y2=\"" << top + h + 5 << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << fmt(x_of(xv)) << "\" y=\"" << top + h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(xv)
            << "</text>\n";
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << fmt(y_of(yv)) << "\" x2=\"" << left
            << "\" y2=\"" << fmt(y_of(yv)) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << fmt(y_of(yv) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv)
            << "</text>\n";
    }
    out << "<text x=\"" << left + w / 2 << "\" y=\"" << style.height - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << table.columns[0] << "</text>\n";

    for (std::size_t s = 0; s < idx.size(); ++s) {
        const char* color = kPalette[s % std::size(kPalette)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& row : table.rows) {
            out << fmt(x_of(row[0])) << "," << fmt(y_of(row[idx[s]])) << " ";
        }
        out << "\"/>\n";
        // legend entry
        const double ly = top + 16 + 16 * static_cast<double>(s);
        out << "<line x1=\"" << left + w - 120 << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
            << left + w - 100 << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + w - 94 << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << columns[s] << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace qdyn::cli
