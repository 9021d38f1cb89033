#include "scenekit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <sstream>

#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/timeutil.hpp"

namespace scenekit::svg {

namespace {

std::string num(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6g", v);
    return buffer;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& options) {
    constexpr double kLeft = 62, kRight = 18, kTop = 34, kBottom = 48;
    const double plot_w = options.width - kLeft - kRight;
    const double plot_h = options.height - kTop - kBottom;
    if (plot_w <= 0 || plot_h <= 0) throw Error(errc::bad_config, "chart area is empty");

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || (!s.whiskers.empty() && s.whiskers.size() != s.x.size())) {
            throw Error(errc::bad_config, "series '" + s.label + "' has mismatched lengths");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            double w = (!s.whiskers.empty() && std::isfinite(s.whiskers[i])) ? s.whiskers[i] : 0;
            y_min = std::min(y_min, s.y[i] - w);
            y_max = std::max(y_max, s.y[i] + w);
        }
    }
    if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
        throw Error(errc::bad_config, "no finite points to plot");
    }
    if (x_max == x_min) { x_min -= 0.5; x_max += 0.5; }
    if (y_max == y_min) { y_min -= 0.5; y_max += 0.5; }
    double x_pad = 0.04 * (x_max - x_min), y_pad = 0.06 * (y_max - y_min);
    x_min -= x_pad; x_max += x_pad; y_min -= y_pad; y_max += y_pad;

    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (options.timestamp_comment) {
        out << "<!-- generated " << timeutil::format_instant(std::time(nullptr)) << " -->\n";
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
        << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << " "
        << options.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!options.title.empty()) {
        out << "<text x=\"" << num(options.width / 2.0)
            << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
            << escape(options.title) << "</text>\n";
    }

    out << "<g stroke=\"#888\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
        double xv = x_min + (x_max - x_min) * i / 4.0;
        double yv = y_min + (y_max - y_min) * i / 4.0;
        out << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\""
            << num(px(xv)) << "\" y2=\"" << num(kTop + plot_h + 5) << "\"/>\n";
        out << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + plot_h + 18)
            << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" << num(xv)
            << "</text>\n";
        out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\""
            << num(kLeft) << "\" y2=\"" << num(py(yv)) << "\"/>\n";
        out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(yv) + 4)
            << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333\">" << num(yv) << "</text>\n";
    }
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
        << "\" y2=\"" << num(kTop + plot_h) << "\"/>\n";
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\""
        << num(kLeft + plot_w) << "\" y2=\"" << num(kTop + plot_h) << "\"/>\n";
    out << "</g>\n";
    if (!options.x_label.empty()) {
        out << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\""
            << num(options.height - 10.0)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << escape(options.x_label) << "</text>\n";
    }
    if (!options.y_label.empty()) {
        out << "<text x=\"14\" y=\"" << num(kTop + plot_h / 2)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\""
            << " transform=\"rotate(-90 14 " << num(kTop + plot_h / 2) << ")\">"
            << escape(options.y_label) << "</text>\n";
    }

    double legend_y = kTop + 6;
    for (const auto& s : series) {
        if (!s.whiskers.empty()) {
            out << "<g stroke=\"" << s.color << "\" stroke-width=\"1\">\n";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.whiskers[i]) || s.whiskers[i] <= 0) continue;
                double cx = px(s.x[i]);
                double lo = py(s.y[i] - s.whiskers[i]), hi = py(s.y[i] + s.whiskers[i]);
                out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(lo) << "\" x2=\"" << num(cx)
                    << "\" y2=\"" << num(hi) << "\"/>\n";
                out << "<line x1=\"" << num(cx - 3) << "\" y1=\"" << num(lo) << "\" x2=\""
                    << num(cx + 3) << "\" y2=\"" << num(lo) << "\"/>\n";
                out << "<line x1=\"" << num(cx - 3) << "\" y1=\"" << num(hi) << "\" x2=\""
                    << num(cx + 3) << "\" y2=\"" << num(hi) << "\"/>\n";
            }
            out << "</g>\n";
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!first) out << " ";
            out << num(px(s.x[i])) << "," << num(py(s.y[i]));
            first = false;
        }
        out << "\"/>\n";
        if (s.markers) {
            out << "<g fill=\"" << s.color << "\">\n";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
                    << "\" r=\"2.4\"/>\n";
            }
            out << "</g>\n";
        }
        if (!s.label.empty()) {
            out << "<line x1=\"" << num(kLeft + plot_w - 130) << "\" y1=\"" << num(legend_y)
                << "\" x2=\"" << num(kLeft + plot_w - 110) << "\" y2=\"" << num(legend_y)
                << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
            out << "<text x=\"" << num(kLeft + plot_w - 104) << "\" y=\"" << num(legend_y + 4)
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label)
                << "</text>\n";
            legend_y += 16;
        }
    }
    out << "</svg>\n";
    return out.str();
}

void write_chart(const std::filesystem::path& path, const std::vector<Series>& series,
                 const ChartOptions& options) {
    csv::write_file(path, render_line_chart(series, options));
}

}  // namespace scenekit::svg
