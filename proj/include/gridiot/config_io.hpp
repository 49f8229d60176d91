#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gridiot/config.hpp"
#include "gridiot/csv.hpp"
#include "gridiot/errors.hpp"

namespace gridiot {

// INI layout. Units are part of the key names.
//
//   [network]  delta_x_m, delta_y_m, cell_radius_m, path_loss_eta,
//              window_lines, window_area_km2, placement
//   [antenna]  beam_b, lobes_n
//   [traffic]  packet_kbits, interarrival_s, slot_ms, bandwidth_mhz, rate_gap_zeta
//   [power]    mode, rho_dbm, noise_dbm, constant_power_mw

namespace detail {

inline const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"network", {"delta_x_m", "delta_y_m", "cell_radius_m", "path_loss_eta", "window_lines",
                     "window_area_km2", "placement"}},
        {"antenna", {"beam_b", "lobes_n"}},
        {"traffic", {"packet_kbits", "interarrival_s", "slot_ms", "bandwidth_mhz", "rate_gap_zeta"}},
        {"power", {"mode", "rho_dbm", "noise_dbm", "constant_power_mw"}},
    };
    return keys;
}

template <class T>
void read_key(const boost::property_tree::ptree& tree, const std::string& path, T& target)
{
    const auto node = tree.get_optional<std::string>(path);
    if (!node) return;
    std::istringstream in(*node);
    in.imbue(std::locale::classic());
    T value{};
    if (!(in >> value) || !(in >> std::ws).eof())
        throw ConfigError("bad value '" + *node + "' for " + path);
    target = value;
}

} // namespace detail

/// Reads a configuration; missing keys keep their defaults, unknown keys are
/// rejected. Throws ConfigError on any problem.
inline NetworkConfig parse_config(std::istream& in)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    for (const auto& [section, body] : tree) {
        const auto it = detail::known_keys().find(section);
        if (it == detail::known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' must live inside a section");
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }

    NetworkConfig c;
    detail::read_key(tree, "network.delta_x_m", c.delta_x);
    detail::read_key(tree, "network.delta_y_m", c.delta_y);
    detail::read_key(tree, "network.cell_radius_m", c.cell_radius);
    detail::read_key(tree, "network.path_loss_eta", c.path_loss_eta);
    detail::read_key(tree, "network.window_lines", c.window.lines);
    double area_km2 = c.window.area_m2 / 1e6;
    detail::read_key(tree, "network.window_area_km2", area_km2);
    c.window.area_m2 = area_km2 * 1e6;
    if (auto s = tree.get_optional<std::string>("network.placement")) c.placement = parse_placement(*s);

    detail::read_key(tree, "antenna.beam_b", c.beam_b);
    detail::read_key(tree, "antenna.lobes_n", c.lobes_n);

    double kbits = c.packet_bits / 1e3, slot_ms = c.slot_s * 1e3, mhz = c.bandwidth_hz / 1e6;
    detail::read_key(tree, "traffic.packet_kbits", kbits);
    detail::read_key(tree, "traffic.interarrival_s", c.interarrival_s);
    detail::read_key(tree, "traffic.slot_ms", slot_ms);
    detail::read_key(tree, "traffic.bandwidth_mhz", mhz);
    detail::read_key(tree, "traffic.rate_gap_zeta", c.rate_gap_zeta);
    c.packet_bits = kbits * 1e3;
    c.slot_s = slot_ms / 1e3;
    c.bandwidth_hz = mhz * 1e6;

    if (auto s = tree.get_optional<std::string>("power.mode")) c.power_mode = parse_power_mode(*s);
    double rho_dbm = watts_to_dbm(c.rho_w), noise_dbm = watts_to_dbm(c.noise_w);
    detail::read_key(tree, "power.rho_dbm", rho_dbm);
    detail::read_key(tree, "power.noise_dbm", noise_dbm);
    c.rho_w = dbm_to_watts(rho_dbm);
    c.noise_w = dbm_to_watts(noise_dbm);
    if (tree.get_optional<std::string>("power.constant_power_mw")) {
        double mw = 0.0;
        detail::read_key(tree, "power.constant_power_mw", mw);
        c.constant_power_w = mw / 1e3;
    }

    validate(c);
    return c;
}

inline NetworkConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

/// Writes the resolved configuration in the format parse_config reads.
inline void write_config(std::ostream& out, const NetworkConfig& c)
{
    out << "[network]\n"
        << "delta_x_m = " << format_number(c.delta_x) << "\n"
        << "delta_y_m = " << format_number(c.delta_y) << "\n"
        << "cell_radius_m = " << format_number(c.cell_radius) << "\n"
        << "path_loss_eta = " << format_number(c.path_loss_eta) << "\n"
        << "window_lines = " << c.window.lines << "\n"
        << "window_area_km2 = " << format_number(c.window.area_m2 / 1e6) << "\n"
        << "placement = " << to_string(c.placement) << "\n\n"
        << "[antenna]\n"
        << "beam_b = " << format_number(c.beam_b) << "\n"
        << "lobes_n = " << c.lobes_n << "\n\n"
        << "[traffic]\n"
        << "packet_kbits = " << format_number(c.packet_bits / 1e3) << "\n"
        << "interarrival_s = " << format_number(c.interarrival_s) << "\n"
        << "slot_ms = " << format_number(c.slot_s * 1e3) << "\n"
        << "bandwidth_mhz = " << format_number(c.bandwidth_hz / 1e6) << "\n"
        << "rate_gap_zeta = " << format_number(c.rate_gap_zeta) << "\n\n"
        << "[power]\n"
        << "mode = " << to_string(c.power_mode) << "\n"
        << "rho_dbm = " << format_number(watts_to_dbm(c.rho_w)) << "\n"
        << "noise_dbm = " << format_number(watts_to_dbm(c.noise_w)) << "\n";
    if (c.constant_power_w) out << "constant_power_mw = " << format_number(*c.constant_power_w * 1e3) << "\n";
}

} // namespace gridiot
