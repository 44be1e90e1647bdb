#include "pdgeo/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pdgeo::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
    void pad() {
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
            const double d = std::max(1.0, std::abs(hi)) * 0.1;
            lo -= d;
            hi += d;
        }
    }
};

std::vector<double> nice_ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> ticks;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) ticks.push_back(v);
    return ticks;
}

// Plot-area mapping shared by both chart kinds.
struct Frame {
    double left = 70, right = 20, top = 40, bottom = 55;
    int width, height;
    Range x, y;

    double px(double v) const { return left + (v - x.lo) / (x.hi - x.lo) * (width - left - right); }
    double py(double v) const { return height - bottom - (v - y.lo) / (y.hi - y.lo) * (height - top - bottom); }
};

void open(std::ostringstream& out, const Frame& f, const ChartOptions& o) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
        << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!o.title.empty())
        out << "<text x=\"" << num(f.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
            << escape(o.title) << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const ChartOptions& o) {
    const double x0 = f.left, x1 = f.width - f.right, y0 = f.height - f.bottom, y1 = f.top;
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
        << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(f.x.lo, f.x.hi)) {
        out << "<line x1=\"" << num(f.px(t)) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(f.px(t)) << "\" y2=\""
            << num(y0 + 5) << "\" stroke=\"black\"/>"
            << "<text x=\"" << num(f.px(t)) << "\" y=\"" << num(y0 + 18) << "\" text-anchor=\"middle\">"
            << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(f.y.lo, f.y.hi)) {
        out << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(f.py(t)) << "\" x2=\"" << num(x0) << "\" y2=\""
            << num(f.py(t)) << "\" stroke=\"black\"/>"
            << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(f.py(t) + 4) << "\" text-anchor=\"end\">"
            << tick_label(t) << "</text>\n";
    }
    if (!o.x_label.empty())
        out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(f.height - 12.0)
            << "\" text-anchor=\"middle\">" << escape(o.x_label) << "</text>\n";
    if (!o.y_label.empty())
        out << "<text transform=\"translate(16," << num((y0 + y1) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
            << escape(o.y_label) << "</text>\n";
}

void legend(std::ostringstream& out, const Frame& f, const std::vector<std::string>& labels) {
    double y = f.top + 16;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].empty()) continue;
        const double x = f.width - f.right - 150;
        out << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - 4) << "\" x2=\"" << num(x + 20) << "\" y2=\""
            << num(y - 4) << "\" stroke=\"" << kPalette[i % 10] << "\" stroke-width=\"2\"/>"
            << "<text x=\"" << num(x + 26) << "\" y=\"" << num(y) << "\">" << escape(labels[i]) << "</text>\n";
        y += 16;
    }
}

void polyline(std::ostringstream& out, const Frame& f, const std::vector<double>& xs, const std::vector<double>& ys,
              const char* colour) {
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
        out << (i ? " " : "") << num(f.px(xs[i])) << ',' << num(f.py(ys[i]));
    }
    out << "\"/>\n";
}

}  // namespace

std::string line_chart(const std::vector<Series>& series, const ChartOptions& options) {
    Frame f{};
    f.width = options.width;
    f.height = options.height;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw ConfigError("series '" + s.label + "' has mismatched x/y lengths");
        for (double v : s.x) f.x.add(v);
        for (double v : s.y) f.y.add(v);
    }
    if (!f.x.valid() || !f.y.valid()) throw ConfigError("nothing to plot: all series are empty");
    f.x.pad();
    f.y.pad();

    std::ostringstream out;
    open(out, f, options);
    axes(out, f, options);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < series.size(); ++i) {
        polyline(out, f, series[i].x, series[i].y, kPalette[i % 10]);
        labels.push_back(series[i].label);
    }
    legend(out, f, labels);
    out << "</svg>\n";
    return out.str();
}

std::vector<std::array<double, 4>> iso_segments(const VectorXd& xs, const VectorXd& ys, const MatrixXd& values,
                                                double level) {
    std::vector<std::array<double, 4>> out;
    auto cross = [&](double xa, double ya, double va, double xb, double yb, double vb) {
        const double s = (level - va) / (vb - va);
        return std::array<double, 2>{xa + s * (xb - xa), ya + s * (yb - ya)};
    };
    for (Eigen::Index i = 0; i + 1 < ys.size(); ++i) {
        for (Eigen::Index j = 0; j + 1 < xs.size(); ++j) {
            const double v00 = values(i, j), v01 = values(i, j + 1), v10 = values(i + 1, j),
                         v11 = values(i + 1, j + 1);
            const bool a00 = v00 >= level, a01 = v01 >= level, a10 = v10 >= level, a11 = v11 >= level;
            std::vector<std::array<double, 2>> pts;  // bottom, right, top, left order
            std::array<bool, 4> hit{a00 != a01, a01 != a11, a10 != a11, a00 != a10};
            if (hit[0]) pts.push_back(cross(xs[j], ys[i], v00, xs[j + 1], ys[i], v01));
            if (hit[1]) pts.push_back(cross(xs[j + 1], ys[i], v01, xs[j + 1], ys[i + 1], v11));
            if (hit[2]) pts.push_back(cross(xs[j], ys[i + 1], v10, xs[j + 1], ys[i + 1], v11));
            if (hit[3]) pts.push_back(cross(xs[j], ys[i], v00, xs[j], ys[i + 1], v10));
            if (pts.size() == 2) {
                out.push_back({pts[0][0], pts[0][1], pts[1][0], pts[1][1]});
            } else if (pts.size() == 4) {
                const bool centre = 0.25 * (v00 + v01 + v10 + v11) >= level;
                if (centre == a00) {
                    out.push_back({pts[0][0], pts[0][1], pts[1][0], pts[1][1]});
                    out.push_back({pts[2][0], pts[2][1], pts[3][0], pts[3][1]});
                } else {
                    out.push_back({pts[0][0], pts[0][1], pts[3][0], pts[3][1]});
                    out.push_back({pts[1][0], pts[1][1], pts[2][0], pts[2][1]});
                }
            }
        }
    }
    return out;
}

std::string contour_plot(const VectorXd& xs, const VectorXd& ys, const MatrixXd& values, int levels,
                         const std::vector<Overlay>& overlays, const ChartOptions& options) {
    if (xs.size() < 2 || ys.size() < 2) throw ConfigError("contour grid needs at least 2 x 2 samples");
    if (values.rows() != ys.size() || values.cols() != xs.size()) throw ConfigError("contour grid shape mismatch");
    if (levels < 1) throw ConfigError("contour plot needs at least one level");
    Frame f{};
    f.width = options.width;
    f.height = options.height;
    f.x.add(xs[0]);
    f.x.add(xs[xs.size() - 1]);
    f.y.add(ys[0]);
    f.y.add(ys[ys.size() - 1]);

    std::ostringstream out;
    open(out, f, options);
    Range v;
    for (Eigen::Index k = 0; k < values.size(); ++k) v.add(values.data()[k]);
    if (v.valid() && v.hi > v.lo) {
        for (int l = 1; l <= levels; ++l) {
            const double level = v.lo + (v.hi - v.lo) * l / (levels + 1);
            const double shade = 0.35 + 0.5 * (1.0 - static_cast<double>(l) / (levels + 1));
            char colour[16];
            std::snprintf(colour, sizeof(colour), "#%02x%02x%02x", static_cast<int>(255 * shade),
                          static_cast<int>(255 * shade), static_cast<int>(255 * shade));
            out << "<path fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\" d=\"";
            for (const auto& s : iso_segments(xs, ys, values, level))
                out << 'M' << num(f.px(s[0])) << ' ' << num(f.py(s[1])) << 'L' << num(f.px(s[2])) << ' '
                    << num(f.py(s[3]));
            out << "\"/>\n";
        }
    }
    axes(out, f, options);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < overlays.size(); ++i) {
        const MatrixXd& p = overlays[i].points;
        if (p.rows() != 2) throw ConfigError("contour overlays must be two-dimensional");
        std::vector<double> px(p.cols()), py(p.cols());
        for (Eigen::Index k = 0; k < p.cols(); ++k) {
            px[k] = p(0, k);
            py[k] = p(1, k);
        }
        polyline(out, f, px, py, kPalette[i % 10]);
        labels.push_back(overlays[i].label);
    }
    legend(out, f, labels);
    out << "</svg>\n";
    return out.str();
}

}  // namespace pdgeo::svg
