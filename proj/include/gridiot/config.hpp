#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "gridiot/errors.hpp"

namespace gridiot {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

enum class Directivity { DgwDn, DgwOn, OgwOn };
enum class PowerMode { Constant, Inversion };
enum class Approximation { OneDPpp, TwoDPpp, MonteCarlo };

struct Scenario {
    Directivity directivity = Directivity::DgwDn;
    PowerMode power = PowerMode::Constant;
    Approximation approximation = Approximation::TwoDPpp;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline std::string_view to_string(Directivity d)
{
    switch (d) {
    case Directivity::DgwDn: return "dgw-dn";
    case Directivity::DgwOn: return "dgw-on";
    case Directivity::OgwOn: return "ogw-on";
    }
    return "?";
}

inline std::string_view to_string(PowerMode p)
{
    return p == PowerMode::Constant ? "constant" : "inversion";
}

inline std::string_view to_string(Approximation a)
{
    switch (a) {
    case Approximation::OneDPpp: return "1d";
    case Approximation::TwoDPpp: return "2d";
    case Approximation::MonteCarlo: return "mc";
    }
    return "?";
}

inline Directivity parse_directivity(std::string_view s)
{
    if (s == "dgw-dn" || s == "DGW_DN") return Directivity::DgwDn;
    if (s == "dgw-on" || s == "DGW_ON") return Directivity::DgwOn;
    if (s == "ogw-on" || s == "OGW_ON") return Directivity::OgwOn;
    throw ConfigError("unknown scenario '" + std::string(s) + "' (expected dgw-dn, dgw-on or ogw-on)");
}

inline PowerMode parse_power_mode(std::string_view s)
{
    if (s == "constant") return PowerMode::Constant;
    if (s == "inversion") return PowerMode::Inversion;
    throw ConfigError("unknown power mode '" + std::string(s) + "' (expected constant or inversion)");
}

/// Number of main-lobe gain factors on the intended link: 2 for D-GW/D-N,
/// 1 for D-GW/O-N and 0 for O-GW/O-N.
inline int directional_ends(Directivity d)
{
    switch (d) {
    case Directivity::DgwDn: return 2;
    case Directivity::DgwOn: return 1;
    case Directivity::OgwOn: return 0;
    }
    return 0;
}

/// How devices are laid out relative to the gateways.
enum class DevicePlacement {
    /// One grid for the whole network: lines at y = (j + 1/2) delta_y, devices
    /// at x = k delta_x; each device joins the hexagon that contains it.
    SharedLines,
    /// Every cell carries the same pattern centred on its gateway, so every
    /// cell holds exactly the closed-form device count.
    PerCell,
};

inline std::string_view to_string(DevicePlacement p)
{
    return p == DevicePlacement::SharedLines ? "shared-lines" : "per-cell";
}

inline DevicePlacement parse_placement(std::string_view s)
{
    if (s == "shared-lines") return DevicePlacement::SharedLines;
    if (s == "per-cell") return DevicePlacement::PerCell;
    throw ConfigError("unknown placement '" + std::string(s) + "' (expected shared-lines or per-cell)");
}

/// Extent of the finite simulation window, centred on the test gateway.
/// The window is a rectangle `lines * delta_y` tall with the given area.
struct WindowExtent {
    int lines = 30;
    double area_m2 = 70.0e6;
};

/// Full parameter set of the grid network. Defaults reproduce the reference
/// deployment (25 m device spacing, 200 m line spacing, 490 m cells).
struct NetworkConfig {
    double delta_x = 25.0;            ///< device spacing along a line [m]
    double delta_y = 200.0;           ///< spacing between lines [m]
    double cell_radius = 490.0;       ///< hexagon circumradius R [m]
    double path_loss_eta = 4.0;
    double rate_gap_zeta = 0.8;
    double bandwidth_hz = 1.0e6;
    double slot_s = 10.0e-3;
    double interarrival_s = 21.6;
    double packet_bits = 80.0e3;
    double noise_w = dbm_to_watts(-110.0);
    double beam_b = 1.0;
    int lobes_n = 1;

    PowerMode power_mode = PowerMode::Inversion;
    double rho_w = dbm_to_watts(-100.0);
    /// Explicit constant transmit power. When unset, the constant-power
    /// analysis uses the power that matches the inversion scheme's total.
    std::optional<double> constant_power_w;

    WindowExtent window{};
    DevicePlacement placement = DevicePlacement::SharedLines;
};

/// Checks the parameter invariants that do not depend on the layout.
inline void validate(const NetworkConfig& c)
{
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(c.delta_x > 0.0, "delta_x must be positive");
    require(c.delta_y >= c.delta_x, "delta_y must be >= delta_x (rotate the grid otherwise)");
    require(c.cell_radius > 0.0, "cell radius must be positive");
    require(c.path_loss_eta > 2.0, "path-loss exponent must exceed 2");
    require(c.rate_gap_zeta > 0.0 && c.rate_gap_zeta <= 1.0, "rate gap zeta must lie in (0, 1]");
    require(c.bandwidth_hz > 0.0, "bandwidth must be positive");
    require(c.slot_s > 0.0, "slot duration must be positive");
    require(c.interarrival_s > 0.0, "inter-arrival time must be positive");
    require(c.packet_bits > 0.0, "packet size must be positive");
    require(c.noise_w >= 0.0, "noise power must be non-negative");
    require(c.beam_b >= 0.0 && c.beam_b <= 1.0, "beam parameter b must lie in [0, 1]");
    require(c.lobes_n >= 1, "number of lobes must be a positive integer");
    require(c.rho_w > 0.0, "rho must be positive");
    require(!c.constant_power_w || *c.constant_power_w > 0.0, "constant power must be positive");
    require(c.window.lines >= 2, "window must span at least two lines");
    require(c.window.area_m2 > 0.0, "window area must be positive");
}

/// Transmission cycles between packet generations, T_r / (N_G T_s).
/// Throws ConfigError unless the ratio is a positive integer.
inline int cycles_between_arrivals(double interarrival_s, int devices_per_cell, double slot_s)
{
    const double cycle = devices_per_cell * slot_s;
    const double ratio = interarrival_s / cycle;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("inter-arrival time " + std::to_string(interarrival_s)
                          + " s is not a positive multiple of the Tx cycle "
                          + std::to_string(cycle) + " s");
    }
    return static_cast<int>(rounded);
}

} // namespace gridiot
