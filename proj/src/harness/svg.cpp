#include "nmtlab/harness.hpp"

#include "nmtlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nmtlab::harness {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 440;
constexpr double kLeft = 70;
constexpr double kRight = 170;  // legend column
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr const char* kShades[3] = {"#7f0000", "#d7301f", "#fc8d59"};
constexpr const char* kGroupNames[3] = {"Group 1 (SOV)", "Group 2 (flexible)", "Group 3 (SVO)"};
constexpr const char* kFitColor = "#1f4fb4";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    if (std::abs(v) < 1e-12) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

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

struct Range {
    double lo;
    double hi;
};

Range padded(double lo, double hi) {
    if (hi - lo < 1e-12) {
        const double w = std::max(std::abs(lo) * 0.1, 0.5);
        return {lo - w, hi + w};
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
    return nice * mag;
}

std::vector<double> ticks(const Range& r) {
    const double step = nice_step(r.hi - r.lo);
    std::vector<double> out;
    for (double k = std::ceil(r.lo / step); k * step <= r.hi + step * 1e-9; k += 1.0) out.push_back(k * step);
    return out;
}

} // namespace

std::string plot_scatter(const std::vector<ScatterPoint>& points, const stats::FitResult& fit,
                         const PlotLabels& labels) {
    if (points.empty()) throw Error("plot_scatter needs at least one point");
    for (const auto& p : points) {
        if (p.group < 1 || p.group > 3) throw Error("plot_scatter: group must be 1, 2 or 3");
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error("plot_scatter: non-finite coordinate");
    }

    double xmin = points[0].x, xmax = points[0].x;
    for (const auto& p : points) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
    }
    const double fit_y0 = fit.intercept + fit.slope * xmin;
    const double fit_y1 = fit.intercept + fit.slope * xmax;
    double ymin = std::min(fit_y0, fit_y1), ymax = std::max(fit_y0, fit_y1);
    for (const auto& p : points) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const Range xr = padded(xmin, xmax);
    const Range yr = padded(ymin, ymax);

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto sy = [&](double y) { return kTop + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    if (!labels.title.empty())
        s << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
          << escape(labels.title) << "</text>\n";

    // axes
    const double x0 = kLeft, y0 = kTop + plot_h;
    s << "<g stroke=\"#000\" stroke-width=\"1\">\n";
    s << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0 + plot_w) << "\" y2=\"" << fmt(y0)
      << "\"/>\n";
    s << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(x0) << "\" y2=\"" << fmt(y0)
      << "\"/>\n";
    for (double t : ticks(xr))
        s << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(sx(t)) << "\" y2=\""
          << fmt(y0 + 5) << "\"/>\n";
    for (double t : ticks(yr))
        s << "<line x1=\"" << fmt(x0 - 5) << "\" y1=\"" << fmt(sy(t)) << "\" x2=\"" << fmt(x0) << "\" y2=\""
          << fmt(sy(t)) << "\"/>\n";
    s << "</g>\n";
    for (double t : ticks(xr))
        s << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(y0 + 18) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    for (double t : ticks(yr))
        s << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(sy(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
          << "</text>\n";
    s << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"" << fmt(kHeight - 16) << "\" text-anchor=\"middle\">"
      << escape(labels.x) << "</text>\n";
    s << "<text x=\"16\" y=\"" << fmt(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fmt(kTop + plot_h / 2) << ")\">" << escape(labels.y) << "</text>\n";

    s << "<line x1=\"" << fmt(sx(xmin)) << "\" y1=\"" << fmt(sy(fit_y0)) << "\" x2=\"" << fmt(sx(xmax))
      << "\" y2=\"" << fmt(sy(fit_y1)) << "\" stroke=\"" << kFitColor
      << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";

    for (const auto& p : points) {
        s << "<circle cx=\"" << fmt(sx(p.x)) << "\" cy=\"" << fmt(sy(p.y)) << "\" r=\"5\" fill=\""
          << kShades[p.group - 1] << "\" stroke=\"#333\" stroke-width=\"0.5\">";
        if (!p.label.empty()) s << "<title>" << escape(p.label) << "</title>";
        s << "</circle>\n";
        if (!p.label.empty())
            s << "<text x=\"" << fmt(sx(p.x) + 7) << "\" y=\"" << fmt(sy(p.y) - 6) << "\" font-size=\"10\">"
              << escape(p.label) << "</text>\n";
    }

    // legend: swatches are squares so circles stay one per point
    const double lx = kWidth - kRight + 20;
    for (int g = 0; g < 3; ++g) {
        const double ly = kTop + 10 + g * 20;
        s << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
          << kShades[g] << "\"/>\n";
        s << "<text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly) << "\">" << kGroupNames[g] << "</text>\n";
    }
    char fitbuf[96];
    std::snprintf(fitbuf, sizeof fitbuf, "fit: y = %.4g x %c %.4g", fit.slope, fit.intercept < 0 ? '-' : '+',
                  std::abs(fit.intercept));
    s << "<text x=\"" << fmt(lx) << "\" y=\"" << fmt(kTop + 80) << "\" fill=\"" << kFitColor << "\">" << fitbuf
      << "</text>\n";
    char r2buf[48];
    std::snprintf(r2buf, sizeof r2buf, "r² = %.3f (dashed)", fit.r_squared);
    s << "<text x=\"" << fmt(lx) << "\" y=\"" << fmt(kTop + 96) << "\" fill=\"" << kFitColor << "\">" << r2buf
      << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

} // namespace nmtlab::harness
