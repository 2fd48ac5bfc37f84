#pragma once

#include <string>
#include <vector>

#include "fwnav/traces.hpp"

namespace fwnav {

/// Minimal line/scatter chart written as standalone SVG.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label, int width = 900,
            int height = 420);

    void line(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
              const std::string& label = "");
    void points(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                const std::string& label = "", double radius = 3.0);
    void segment(double x0, double y0, double x1, double y1, const std::string& color,
                 double width = 3.0);
    void vline(double x, const std::string& color);
    // Same scale on both axes (plan views).
    void equal_aspect() { equal_ = true; }

    std::string render() const;

private:
    struct Series {
        std::vector<double> x, y;
        std::string color, label;
        bool scatter = false;
        double radius = 3.0;
    };
    struct Seg {
        double x0, y0, x1, y1;
        std::string color;
        double width;
    };
    std::string title_, x_label_, y_label_;
    int w_, h_;
    bool equal_ = false;
    std::vector<Series> series_;
    std::vector<Seg> segs_;
    std::vector<std::pair<double, std::string>> vlines_;
};

/// Filtered currents with their thresholds, collision events marked.
std::string plot_currents(const std::vector<CurrentRow>& rows, const std::vector<EventRow>& events);
/// Plan view of the flown path, the reference and the walls.
std::string plot_trajectory(const std::vector<StateRow>& rows, const std::vector<WallPanel>& walls);
/// Altitude, reference and true terrain against time.
std::string plot_profile(const std::vector<StateRow>& rows);
/// Estimated map over the true geometry: obstacle points on the walls, and
/// terrain samples against the true terrain under the path.
std::string plot_map(const MapEstimate& map, const std::vector<StateRow>& rows,
                     const std::vector<WallPanel>& walls);

}  // namespace fwnav
