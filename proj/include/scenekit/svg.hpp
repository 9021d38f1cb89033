#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace scenekit::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    // Optional symmetric whisker half-widths, aligned with x; empty = none.
    std::vector<double> whiskers;
    std::string color = "#2a6fbb";
    bool markers = false;
};

struct ChartOptions {
    int width = 760;
    int height = 440;
    std::string title;
    std::string x_label;
    std::string y_label;
    // Emitted as an SVG comment; reruns differ only here. Set false for
    // byte-identical output.
    bool timestamp_comment = true;
};

std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& options);

void write_chart(const std::filesystem::path& path, const std::vector<Series>& series,
                 const ChartOptions& options);

}  // namespace scenekit::svg
