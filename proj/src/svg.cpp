#include "ebike/svg.hpp"

#include "ebike/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ebike::svg {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kLeft = 60;
constexpr int kRight = 20;
constexpr int kTop = 40;
constexpr int kBottom = 110;
constexpr int kGridLines = 5;
constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

// Smallest 1-2-5 step giving at most kGridLines intervals.
double nice_step(double max) {
    if (max <= 0) return 1.0;
    const double raw = max / kGridLines;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) return std::max(1.0, m * mag);
    }
    return std::max(1.0, 10 * mag);
}

std::string label_num(double v) {
    char buf[32];
    if (v == std::floor(v)) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.2f", v);
    }
    return buf;
}

}  // namespace

std::string escape(const std::string& s) {
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

std::string bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<Series>& series) {
    for (const auto& s : series) {
        if (s.values.size() != categories.size()) throw DomainError("series " + s.name + " length mismatch");
    }
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    double max = 0;
    for (const auto& s : series) {
        for (double v : s.values) max = std::max(max, v);
    }
    const double step = nice_step(max);
    const double top = step * kGridLines;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";

    for (int g = 0; g <= kGridLines; ++g) {
        const double y = kTop + plot_h - plot_h * g / kGridLines;
        o << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << num(y)
          << "\" stroke=\"#dddddd\"/>\n";
        o << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
          << label_num(step * g) << "</text>\n";
    }
    o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"#333333\"/>\n";

    if (categories.empty() || series.empty()) {
        o << "<text x=\"" << kWidth / 2 << "\" y=\"" << num(kTop + plot_h / 2)
          << "\" text-anchor=\"middle\" fill=\"#777777\">no data</text>\n";
    } else {
        const double slot = plot_w / static_cast<double>(categories.size());
        const double bar = slot * 0.8 / static_cast<double>(series.size());
        for (std::size_t c = 0; c < categories.size(); ++c) {
            const double x0 = kLeft + slot * static_cast<double>(c) + slot * 0.1;
            for (std::size_t s = 0; s < series.size(); ++s) {
                const double v = series[s].values[c];
                const double h = plot_h * v / top;
                o << "<rect x=\"" << num(x0 + bar * static_cast<double>(s)) << "\" y=\"" << num(kTop + plot_h - h)
                  << "\" width=\"" << num(bar) << "\" height=\"" << num(h) << "\" fill=\""
                  << kPalette[s % std::size(kPalette)] << "\"><title>" << escape(series[s].name) << " / "
                  << escape(categories[c]) << ": " << label_num(v) << "</title></rect>\n";
            }
            const double lx = kLeft + slot * (static_cast<double>(c) + 0.5);
            const double ly = kTop + plot_h + 14;
            o << "<text x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" text-anchor=\"end\" transform=\"rotate(-40 "
              << num(lx) << ' ' << num(ly) << ")\">" << escape(categories[c]) << "</text>\n";
        }
        if (series.size() > 1) {
            for (std::size_t s = 0; s < series.size(); ++s) {
                const double ly = kTop + 12.0 * static_cast<double>(s);
                o << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << num(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
                  << kPalette[s % std::size(kPalette)] << "\"/>\n";
                o << "<text x=\"" << kWidth - kRight - 136 << "\" y=\"" << num(ly + 1) << "\">"
                  << escape(series[s].name) << "</text>\n";
            }
        }
    }
    o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"#333333\"/>\n";
    o << "</svg>\n";
    return o.str();
}

}  // namespace ebike::svg
