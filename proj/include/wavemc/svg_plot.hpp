/// Minimal self-contained SVG line plots (optional figure output).
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wavemc {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;

    void add(std::string label, std::vector<double> x, std::vector<double> y);
    void write(std::ostream& out) const;
    void write_file(const std::string& path) const;
};

}  // namespace wavemc
