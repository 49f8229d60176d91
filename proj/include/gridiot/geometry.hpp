#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gridiot/config.hpp"
#include "gridiot/errors.hpp"

namespace gridiot {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double squared_norm(Point p) { return p.x * p.x + p.y * p.y; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }

/// G(theta) = 1 + b cos(n theta). b = 0 gives the isotropic pattern.
struct AntennaPattern {
    double b = 1.0;
    int n = 1;

    double operator()(double theta) const
    {
        const double reduced = std::remainder(theta, 2.0 * std::numbers::pi);
        return 1.0 + b * std::cos(n * reduced);
    }

    double peak() const { return 1.0 + b; }
};

inline double gain(double theta, const AntennaPattern& pattern) { return pattern(theta); }

struct CellCount {
    int lines_per_half = 0; ///< Y: device lines crossing one half of the hexagon
    int devices = 0;        ///< N_G
};

/// Number of devices on line i (offset (i + 1/2) delta_y) inside one hexagon.
inline int devices_on_line(int i, double delta_x, double delta_y, double cell_radius)
{
    const double chord = 2.0 * cell_radius - (2.0 * i + 1.0) * delta_y / std::numbers::sqrt3;
    return std::max(0, static_cast<int>(std::floor(chord / delta_x + 0.5)));
}

/// Closed-form line and device counts of a flat-topped hexagonal cell
/// centred between two device lines.
inline CellCount devices_per_gateway(double delta_x, double delta_y, double cell_radius)
{
    if (!(delta_x > 0.0) || !(delta_y > 0.0) || !(cell_radius > 0.0))
        throw DomainError("devices_per_gateway: spacings and radius must be positive");
    CellCount out;
    out.lines_per_half = static_cast<int>(
        std::floor(std::numbers::sqrt3 * cell_radius / (2.0 * delta_y) + 0.5));
    if (out.lines_per_half == 0)
        throw DomainError("empty cell: radius " + std::to_string(cell_radius)
                          + " m is below delta_y/sqrt(3)");
    for (int i = 0; i < out.lines_per_half; ++i)
        out.devices += 2 * devices_on_line(i, delta_x, delta_y, cell_radius);
    if (out.devices == 0)
        throw DomainError("empty cell: no device fits inside the hexagon");
    return out;
}

/// Closed hexagon test (flat-topped, circumradius R) with a relative slack.
inline bool hexagon_contains(Point centre, double cell_radius, Point p, double slack = 1e-9)
{
    const double dx = std::abs(p.x - centre.x);
    const double dy = std::abs(p.y - centre.y);
    const double eps = slack * cell_radius;
    return dy <= std::numbers::sqrt3 * cell_radius / 2.0 + eps
        && std::numbers::sqrt3 * dx + dy <= std::numbers::sqrt3 * cell_radius + eps;
}

/// Device grid and hexagonal gateway layout over a finite window.
///
/// Gateway 0 is the test gateway at the origin. Devices of a cell are stored
/// contiguously, so `cell(g)` is a span.
struct GridLayout {
    std::vector<Point> devices;
    std::vector<Point> gateways;
    std::vector<int> association;  ///< device index -> gateway index
    std::vector<int> cell_begin;   ///< CSR offsets into `devices`, size gateways+1
    int devices_per_cell = 0;      ///< devices associated with the central gateway
    int lines_per_half = 0;        ///< Y
    double delta_x = 0.0;
    double delta_y = 0.0;
    double cell_radius = 0.0;
    double window_width = 0.0;
    double window_height = 0.0;

    std::span<const Point> cell(std::size_t g) const
    {
        return std::span<const Point>(devices).subspan(
            static_cast<std::size_t>(cell_begin[g]),
            static_cast<std::size_t>(cell_begin[g + 1] - cell_begin[g]));
    }

    std::size_t interfering_cells() const { return gateways.empty() ? 0 : gateways.size() - 1; }

    double hexagon_area() const
    {
        return 1.5 * std::numbers::sqrt3 * cell_radius * cell_radius;
    }

    /// True when every gateway within 3R of the origin is inside the window.
    bool covers_near_field() const
    {
        return window_width / 2.0 >= 3.0 * cell_radius && window_height / 2.0 >= 3.0 * cell_radius;
    }
};

namespace detail {

inline std::vector<Point> hex_gateways_in_window(double cell_radius, double half_w, double half_h)
{
    // Flat-topped lattice: column q at x = 1.5 R q, rows spaced sqrt(3) R,
    // odd columns shifted by sqrt(3) R / 2.
    const double col = 1.5 * cell_radius;
    const double row = std::numbers::sqrt3 * cell_radius;
    const int qmax = static_cast<int>(std::floor(half_w / col)) + 1;
    const int rmax = static_cast<int>(std::floor(half_h / row)) + 2;
    std::vector<Point> out;
    for (int q = -qmax; q <= qmax; ++q) {
        for (int r = -rmax - qmax; r <= rmax + qmax; ++r) {
            const Point g{col * q, row * (r + 0.5 * q)};
            if (std::abs(g.x) <= half_w * (1 + 1e-12) && std::abs(g.y) <= half_h * (1 + 1e-12))
                out.push_back(g);
        }
    }
    std::sort(out.begin(), out.end(), [](Point a, Point b) {
        const double da = squared_norm(a), db = squared_norm(b);
        if (std::abs(da - db) > 1e-6) return da < db;
        return std::atan2(a.y, a.x) < std::atan2(b.y, b.x);
    });
    return out;
}

} // namespace detail

/// Builds the deterministic layout for `window`. Throws ConfigError when the
/// window cannot hold the central hexagon.
inline GridLayout build_grid(const NetworkConfig& config, const WindowExtent& window)
{
    const DevicePlacement placement = config.placement;
    validate(config);
    const CellCount count = devices_per_gateway(config.delta_x, config.delta_y, config.cell_radius);

    GridLayout layout;
    layout.delta_x = config.delta_x;
    layout.delta_y = config.delta_y;
    layout.cell_radius = config.cell_radius;
    layout.lines_per_half = count.lines_per_half;
    layout.window_height = window.lines * config.delta_y;
    layout.window_width = window.area_m2 / layout.window_height;

    const double R = config.cell_radius;
    const double half_w = layout.window_width / 2.0;
    const double half_h = layout.window_height / 2.0;
    if (half_h < std::numbers::sqrt3 * R / 2.0 || half_w < R) {
        throw ConfigError("simulation window " + std::to_string(layout.window_width) + " x "
                          + std::to_string(layout.window_height)
                          + " m is too small for the central hexagon");
    }

    layout.gateways = detail::hex_gateways_in_window(R, half_w, half_h);
    std::vector<std::vector<Point>> per_cell(layout.gateways.size());

    if (placement == DevicePlacement::PerCell) {
        std::vector<Point> pattern;
        pattern.reserve(static_cast<std::size_t>(count.devices));
        for (int i = 0; i < count.lines_per_half; ++i) {
            const int k = devices_on_line(i, config.delta_x, config.delta_y, R);
            const double y = (i + 0.5) * config.delta_y;
            for (double sign : {1.0, -1.0})
                for (int j = 0; j < k; ++j)
                    pattern.push_back({(j - (k - 1) / 2.0) * config.delta_x, sign * y});
        }
        // Runs longer than the chord can poke into a neighbour; ties and
        // overlaps go to the lower gateway index.
        const double neighbour_dist = std::numbers::sqrt3 * R * (1.0 + 1e-9);
        std::vector<std::size_t> lower;
        for (std::size_t g = 0; g < layout.gateways.size(); ++g) {
            lower.clear();
            for (std::size_t h = 0; h < g; ++h)
                if (norm(layout.gateways[h] - layout.gateways[g]) <= neighbour_dist) lower.push_back(h);
            for (Point offset : pattern) {
                const Point p = layout.gateways[g] + offset;
                std::size_t owner = g;
                for (std::size_t h : lower) {
                    if (hexagon_contains(layout.gateways[h], R, p)) {
                        owner = h;
                        break;
                    }
                }
                per_cell[owner].push_back(p);
            }
        }
    } else {
        // Containing hexagon = nearest gateway; scan the lattice neighbourhood
        // in index order so boundary ties go to the lower index.
        const int lines_half = window.lines / 2;
        const int kmax = static_cast<int>(std::floor(half_w / config.delta_x + 1e-9));
        const double reach = R * (1.0 + 1e-9);
        for (int j = -lines_half; j < window.lines - lines_half; ++j) {
            const double y = (j + 0.5) * config.delta_y;
            for (int k = -kmax; k <= kmax; ++k) {
                const Point p{k * config.delta_x, y};
                for (std::size_t g = 0; g < layout.gateways.size(); ++g) {
                    const Point d = p - layout.gateways[g];
                    if (std::abs(d.x) > reach || std::abs(d.y) > reach) continue;
                    if (hexagon_contains(layout.gateways[g], R, p)) {
                        per_cell[g].push_back(p);
                        break;
                    }
                }
            }
        }
    }

    layout.cell_begin.assign(layout.gateways.size() + 1, 0);
    for (std::size_t g = 0; g < per_cell.size(); ++g) {
        layout.cell_begin[g + 1] = layout.cell_begin[g] + static_cast<int>(per_cell[g].size());
        for (Point p : per_cell[g]) {
            layout.devices.push_back(p);
            layout.association.push_back(static_cast<int>(g));
        }
    }
    layout.devices_per_cell = static_cast<int>(per_cell[0].size());
    return layout;
}

inline GridLayout build_grid(const NetworkConfig& config) { return build_grid(config, config.window); }

/// E{r^2}: mean squared distance between the devices of the central cell and
/// the origin gateway.
inline double second_moment_distance(const GridLayout& layout)
{
    if (layout.gateways.empty() || layout.cell(0).empty())
        throw DomainError("second_moment_distance: central cell is empty");
    double sum = 0.0;
    for (Point p : layout.cell(0)) sum += squared_norm(p);
    return sum / static_cast<double>(layout.cell(0).size());
}

/// Constant transmit power whose total matches path-loss inversion with
/// target received power rho: P = (rho / N_G) * sum ||v||^eta.
inline double equivalent_constant_power(const GridLayout& layout, double rho_w, double eta)
{
    if (layout.gateways.empty() || layout.cell(0).empty())
        throw DomainError("equivalent_constant_power: central cell is empty");
    double sum = 0.0;
    for (Point p : layout.cell(0)) sum += std::pow(norm(p), eta);
    return rho_w * sum / static_cast<double>(layout.cell(0).size());
}

/// Transmit power used by the constant-power scheme for `config`.
inline double constant_power(const NetworkConfig& config, const GridLayout& layout)
{
    if (config.constant_power_w) return *config.constant_power_w;
    return equivalent_constant_power(layout, config.rho_w, config.path_loss_eta);
}

/// Device position at distance r_o from the origin on the nearest device line.
inline Point test_device_at(double r_o, double delta_y)
{
    const double y = delta_y / 2.0;
    if (r_o < y) throw DomainError("link distance is shorter than the half line spacing");
    return {std::sqrt(r_o * r_o - y * y), y};
}

} // namespace gridiot
