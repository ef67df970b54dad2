#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qdyn::cli {

struct PlotStyle {
    int width = 800;
    int height = 500;
    std::string title;
};

/// Renders the named columns of a CSV file against its first column as a
/// deterministic SVG line plot: fixed viewport, no timestamps, so identical
/// input always produces a byte-identical file. Throws ArgumentError for a
/// missing column or empty data (and writes nothing).
void emit_plot(const std::filesystem::path& csv_path, const std::vector<std::string>& columns,
               const PlotStyle& style, const std::filesystem::path& svg_path);

}  // namespace qdyn::cli
