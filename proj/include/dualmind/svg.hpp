#pragma once

#include <string>
#include <vector>

namespace dualmind::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained line chart: axes, ticks, one polyline per series, legend.
/// Output is a deterministic function of the inputs.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series);

struct Bar {
    std::string label;
    double value = 0.0;
    double error = 0.0;  // symmetric error bar; 0 draws none
};

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<Bar>& bars);

}  // namespace dualmind::svg
