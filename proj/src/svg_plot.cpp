#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "wavemc/svg_plot.hpp"

namespace wavemc {

namespace {
constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};
}  // namespace

void LinePlot::add(std::string label, std::vector<double> x, std::vector<double> y) {
    series.push_back({std::move(label), std::move(x), std::move(y)});
}

void LinePlot::write(std::ostream& out) const {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_x && s.x[i] <= 0.0) continue;
            if (log_y && s.y[i] <= 0.0) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
    if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
    const double xpad = 0.03 * (xmax - xmin), ypad = 0.06 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    auto px = [&](double v) { return kLeft + (tx(v) - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight); };
    auto py = [&](double v) { return kHeight - kBottom - (ty(v) - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom); };

    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << kHeight / 2
        << ")\">" << y_label << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
        << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";

    // axis ticks
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double vx = log_x ? std::pow(10.0, fx) : fx;
        const double vy = log_y ? std::pow(10.0, fy) : fy;
        const double sx = kLeft + (kWidth - kLeft - kRight) * i / 4.0;
        const double sy = kHeight - kBottom - (kHeight - kTop - kBottom) * i / 4.0;
        out << "<text x=\"" << sx << "\" y=\"" << kHeight - kBottom + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << std::setprecision(3) << vx
            << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy + 3
            << "\" text-anchor=\"end\" font-size=\"10\">" << vy << "</text>\n" << std::setprecision(6);
    }

    int color = 0;
    double legend_y = kTop + 16;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << kColors[color % 6] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_x && s.x[i] <= 0.0) continue;
            if (log_y && s.y[i] <= 0.0) continue;
            out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << legend_y
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << kColors[color % 6] << "\">"
            << s.label << "</text>\n";
        legend_y += 14;
        ++color;
    }
    out << "</svg>\n";
}

void LinePlot::write_file(const std::string& path) const {
    std::ofstream out(path);
    write(out);
}

}  // namespace wavemc
