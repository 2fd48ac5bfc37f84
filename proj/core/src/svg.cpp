#include "fwnav/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace fwnav {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, int width, int height)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)),
      w_(width), h_(height) {}

void SvgPlot::line(const std::vector<double>& x, const std::vector<double>& y,
                   const std::string& color, const std::string& label) {
    series_.push_back({x, y, color, label, false, 0.0});
}

void SvgPlot::points(const std::vector<double>& x, const std::vector<double>& y,
                     const std::string& color, const std::string& label, double radius) {
    series_.push_back({x, y, color, label, true, radius});
}

void SvgPlot::segment(double x0, double y0, double x1, double y1, const std::string& color,
                      double width) {
    segs_.push_back({x0, y0, x1, y1, color, width});
}

void SvgPlot::vline(double x, const std::string& color) { vlines_.emplace_back(x, color); }

std::string SvgPlot::render() const {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    const auto grow = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    };
    for (const auto& s : series_)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) grow(s.x[i], s.y[i]);
    for (const auto& g : segs_) {
        grow(g.x0, g.y0);
        grow(g.x1, g.y1);
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const double px = 0.05 * (x1 - x0), py = 0.08 * (y1 - y0);
    x0 -= px, x1 += px, y0 -= py, y1 += py;

    const double L = 70, R = 20, T = 40, B = 50;
    double pw = w_ - L - R, ph = h_ - T - B;
    if (equal_) {
        const double s = std::min(pw / (x1 - x0), ph / (y1 - y0));
        pw = s * (x1 - x0);
        ph = s * (y1 - y0);
    }
    const auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
    const auto Y = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w_ / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << esc(title_) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
        os << "<text x=\"" << fmt(X(xv)) << "\" y=\"" << fmt(T + ph + 16)
           << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
        os << "<text x=\"" << fmt(L - 6) << "\" y=\"" << fmt(Y(yv) + 4) << "\" text-anchor=\"end\">"
           << fmt(yv) << "</text>\n";
    }
    os << "<text x=\"" << fmt(L + pw / 2) << "\" y=\"" << fmt(T + ph + 36)
       << "\" text-anchor=\"middle\">" << esc(x_label_) << "</text>\n";
    os << "<text transform=\"translate(16," << fmt(T + ph / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << esc(y_label_) << "</text>\n";

    for (const auto& [x, color] : vlines_) {
        if (x < x0 || x > x1) continue;
        os << "<line x1=\"" << fmt(X(x)) << "\" y1=\"" << T << "\" x2=\"" << fmt(X(x)) << "\" y2=\""
           << fmt(T + ph) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (const auto& g : segs_) {
        os << "<line x1=\"" << fmt(X(g.x0)) << "\" y1=\"" << fmt(Y(g.y0)) << "\" x2=\"" << fmt(X(g.x1))
           << "\" y2=\"" << fmt(Y(g.y1)) << "\" stroke=\"" << g.color << "\" stroke-width=\""
           << fmt(g.width) << "\"/>\n";
    }
    int legend = 0;
    for (const auto& s : series_) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.scatter) {
            for (std::size_t i = 0; i < n; ++i)
                os << "<circle cx=\"" << fmt(X(s.x[i])) << "\" cy=\"" << fmt(Y(s.y[i])) << "\" r=\""
                   << fmt(s.radius) << "\" fill=\"" << s.color << "\"/>\n";
        } else if (n > 1) {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
            for (std::size_t i = 0; i < n; ++i) os << fmt(X(s.x[i])) << ',' << fmt(Y(s.y[i])) << ' ';
            os << "\"/>\n";
        }
        if (!s.label.empty()) {
            const double ly = T + 14 + 16 * legend++;
            os << "<rect x=\"" << fmt(L + pw - 150) << "\" y=\"" << fmt(ly - 9) << "\" width=\"10\" "
               << "height=\"10\" fill=\"" << s.color << "\"/>\n";
            os << "<text x=\"" << fmt(L + pw - 135) << "\" y=\"" << fmt(ly) << "\">" << esc(s.label)
               << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string plot_currents(const std::vector<CurrentRow>& rows, const std::vector<EventRow>& events) {
    SvgPlot p("Wing currents (200 Hz low-pass)", "t [s]", "current [A]", 1200, 420);
    std::vector<double> t, l, r, tl, tr;
    for (const auto& c : rows) {
        t.push_back(c.t);
        l.push_back(c.i_L);
        r.push_back(c.i_R);
        tl.push_back(c.thr_L);
        tr.push_back(c.thr_R);
    }
    p.line(t, l, "#1f77b4", "left");
    p.line(t, r, "#d62728", "right");
    p.line(t, tl, "#0b3c66", "left threshold");
    p.line(t, tr, "#7a1010", "right threshold");
    for (const auto& e : events)
        if (e.kind == "collision") p.vline(e.t, "#2ca02c");
    return p.render();
}

std::string plot_trajectory(const std::vector<StateRow>& rows, const std::vector<WallPanel>& walls) {
    SvgPlot p("Trajectory (plan view)", "x [m]", "y [m]", 900, 700);
    p.equal_aspect();
    std::vector<double> x, y, xr, yr;
    for (const auto& s : rows) {
        x.push_back(s.x);
        y.push_back(s.y);
        xr.push_back(s.x_ref);
        yr.push_back(s.y_ref);
    }
    for (const auto& w : walls) p.segment(w.a.x(), w.a.y(), w.b.x(), w.b.y(), "#444444");
    p.line(xr, yr, "#aaaaaa", "reference");
    p.line(x, y, "#1f77b4", "flown");
    return p.render();
}

std::string plot_profile(const std::vector<StateRow>& rows) {
    SvgPlot p("Altitude and terrain", "t [s]", "z [m]");
    std::vector<double> t, z, zr, h;
    for (const auto& s : rows) {
        t.push_back(s.t);
        z.push_back(s.z);
        zr.push_back(s.z_ref);
        h.push_back(s.terrain);
    }
    p.line(t, h, "#8c564b", "terrain");
    p.line(t, zr, "#aaaaaa", "z reference");
    p.line(t, z, "#1f77b4", "altitude");
    return p.render();
}

std::string plot_map(const MapEstimate& map, const std::vector<StateRow>& rows,
                     const std::vector<WallPanel>& walls) {
    std::ostringstream os;
    SvgPlot plan("Obstacle map " + map.run_id, "x [m]", "y [m]", 900, 700);
    plan.equal_aspect();
    for (const auto& w : walls) plan.segment(w.a.x(), w.a.y(), w.b.x(), w.b.y(), "#444444");
    std::vector<double> x, y, ox, oy;
    for (const auto& s : rows) {
        x.push_back(s.x);
        y.push_back(s.y);
    }
    for (const auto& o : map.obstacles) {
        ox.push_back(o.x);
        oy.push_back(o.y);
    }
    plan.line(x, y, "#cccccc", "path");
    plan.points(ox, oy, "#d62728", "obstacle points", 4.0);

    // Terrain: estimate and truth against distance flown.
    SvgPlot terr("Terrain estimate " + map.run_id, "distance along path [m]", "height [m]");
    std::vector<double> s_true, h_true, s_est, h_est;
    double s = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) s += std::hypot(rows[i].x - rows[i - 1].x, rows[i].y - rows[i - 1].y);
        s_true.push_back(s);
        h_true.push_back(rows[i].terrain);
    }
    for (const auto& e : map.terrain) {
        // Nearest trace point gives the path distance of the sample.
        double best = std::numeric_limits<double>::infinity();
        std::size_t k = j;
        for (std::size_t i = j; i < rows.size(); ++i) {
            const double d = std::hypot(rows[i].x - e.x, rows[i].y - e.y);
            if (d < best) best = d, k = i;
            if (d > best + 0.05) break;
        }
        j = k;
        if (!s_true.empty()) {
            s_est.push_back(s_true[k]);
            h_est.push_back(e.h);
        }
    }
    terr.line(s_true, h_true, "#8c564b", "true terrain");
    terr.points(s_est, h_est, "#1f77b4", "estimated", 2.0);

    // Two charts stacked in one document.
    const std::string a = plan.render(), b = terr.render();
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"1120\">\n"
       << "<g>" << a.substr(a.find('>') + 1, a.rfind("</svg>") - a.find('>') - 1) << "</g>\n"
       << "<g transform=\"translate(0,700)\">"
       << b.substr(b.find('>') + 1, b.rfind("</svg>") - b.find('>') - 1) << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace fwnav
