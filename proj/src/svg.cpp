#include "dualmind/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dualmind::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 48.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range pad(Range r) {
    if (r.hi <= r.lo) {
        r.lo -= 0.5;
        r.hi += 0.5;
    }
    const double margin = 0.05 * (r.hi - r.lo);
    return {r.lo - margin, r.hi + margin};
}

void open_svg(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
       << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
       << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2
       << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" "
          "text-anchor=\"middle\">"
       << title << "</text>\n";
}

void draw_axes(std::ostringstream& os, const std::string& x_label,
               const std::string& y_label, const Range& xr, const Range& yr) {
    const double x0 = kLeft;
    const double x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom;
    const double y1 = kTop;
    os << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\""
       << fmt(x1) << "\" y2=\"" << fmt(y0)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\""
       << fmt(x0) << "\" y2=\"" << fmt(y1)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double t = i / 4.0;
        const double xv = xr.lo + t * (xr.hi - xr.lo);
        const double yv = yr.lo + t * (yr.hi - yr.lo);
        const double px = x0 + t * (x1 - x0);
        const double py = y0 - t * (y0 - y1);
        os << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y0) << "\" x2=\""
           << fmt(px) << "\" y2=\"" << fmt(y0 + 4)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(y0 + 18)
           << "\" font-family=\"sans-serif\" font-size=\"11\" "
              "text-anchor=\"middle\">"
           << fmt_tick(xv) << "</text>\n";
        os << "<line x1=\"" << fmt(x0 - 4) << "\" y1=\"" << fmt(py)
           << "\" x2=\"" << fmt(x0) << "\" y2=\"" << fmt(py)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(py + 4)
           << "\" font-family=\"sans-serif\" font-size=\"11\" "
              "text-anchor=\"end\">"
           << fmt_tick(yv) << "</text>\n";
    }
    os << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(kHeight - 10)
       << "\" font-family=\"sans-serif\" font-size=\"12\" "
          "text-anchor=\"middle\">"
       << x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << fmt((y0 + y1) / 2)
       << "\" font-family=\"sans-serif\" font-size=\"12\" "
          "text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << fmt((y0 + y1) / 2) << ")\">" << y_label << "</text>\n";
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series) {
    Range xr{1e300, -1e300};
    Range yr{1e300, -1e300};
    for (const Series& s : series) {
        for (double v : s.x) {
            xr.lo = std::min(xr.lo, v);
            xr.hi = std::max(xr.hi, v);
        }
        for (double v : s.y) {
            yr.lo = std::min(yr.lo, v);
            yr.hi = std::max(yr.hi, v);
        }
    }
    xr = pad(xr);
    yr = pad(yr);

    const double x0 = kLeft;
    const double x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom;
    const double y1 = kTop;
    auto px = [&](double v) {
        return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0);
    };
    auto py = [&](double v) {
        return y0 - (v - yr.lo) / (yr.hi - yr.lo) * (y0 - y1);
    };

    std::ostringstream os;
    open_svg(os, title);
    draw_axes(os, x_label, y_label, xr, yr);
    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = kPalette[si % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) os << " ";
            os << fmt(px(s.x[i])) << "," << fmt(py(s.y[i]));
        }
        os << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
               << fmt(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
               << "\"/>\n";
        }
        const double ly = kTop + 14.0 * static_cast<double>(si);
        os << "<rect x=\"" << fmt(x1 - 130) << "\" y=\"" << fmt(ly)
           << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"" << fmt(x1 - 116) << "\" y=\"" << fmt(ly + 9)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<Bar>& bars) {
    Range yr{0.0, -1e300};
    for (const Bar& b : bars) yr.hi = std::max(yr.hi, b.value + b.error);
    yr = pad(yr);
    yr.lo = 0.0;

    const double x0 = kLeft;
    const double x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom;
    const double y1 = kTop;
    auto py = [&](double v) {
        return y0 - (v - yr.lo) / (yr.hi - yr.lo) * (y0 - y1);
    };
    const double slot = (x1 - x0) / static_cast<double>(bars.size());

    std::ostringstream os;
    open_svg(os, title);
    draw_axes(os, "", y_label, {0.0, static_cast<double>(bars.size())}, yr);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const Bar& b = bars[i];
        const double cx = x0 + slot * (static_cast<double>(i) + 0.5);
        const double w = slot * 0.6;
        os << "<rect x=\"" << fmt(cx - w / 2) << "\" y=\"" << fmt(py(b.value))
           << "\" width=\"" << fmt(w) << "\" height=\""
           << fmt(y0 - py(b.value)) << "\" fill=\"" << kPalette[i % 6]
           << "\"/>\n";
        if (b.error > 0.0) {
            os << "<line x1=\"" << fmt(cx) << "\" y1=\""
               << fmt(py(b.value - b.error)) << "\" x2=\"" << fmt(cx)
               << "\" y2=\"" << fmt(py(b.value + b.error))
               << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        }
        os << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(y0 + 18)
           << "\" font-family=\"sans-serif\" font-size=\"11\" "
              "text-anchor=\"middle\">"
           << b.label << "</text>\n";
        os << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(py(b.value) - 5)
           << "\" font-family=\"sans-serif\" font-size=\"10\" "
              "text-anchor=\"middle\">"
           << fmt_tick(b.value) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace dualmind::svg
