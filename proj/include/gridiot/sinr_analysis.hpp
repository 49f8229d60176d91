#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "gridiot/config.hpp"
#include "gridiot/errors.hpp"
#include "gridiot/geometry.hpp"
#include "gridiot/quadrature.hpp"
#include "gridiot/special.hpp"

namespace gridiot {

struct SinrThreshold {
    double xi = 0.0;      ///< linear SINR threshold
    double rate_bps = 0.0;
    int segments = 1;
};

/// Threshold that a segment of L/m bits sent in one slot must clear:
/// xi = 2^(L / (m zeta W Ts)) - 1.
inline SinrThreshold sinr_threshold(double packet_bits, int m, double zeta, double bandwidth_hz,
                                    double slot_s)
{
    if (m < 1) throw DomainError("sinr_threshold: need at least one segment");
    if (!(packet_bits > 0.0) || !(bandwidth_hz > 0.0) || !(slot_s > 0.0))
        throw DomainError("sinr_threshold: L, W and Ts must be positive");
    if (!(zeta > 0.0 && zeta <= 1.0)) throw DomainError("sinr_threshold: zeta must lie in (0, 1]");
    const double exponent = packet_bits / (m * zeta * bandwidth_hz * slot_s);
    return {std::expm1(exponent * std::numbers::ln2), packet_bits / (m * slot_s), m};
}

inline SinrThreshold sinr_threshold(const NetworkConfig& c, int m)
{
    return sinr_threshold(c.packet_bits, m, c.rate_gap_zeta, c.bandwidth_hz, c.slot_s);
}

/// Intensity scaling from projecting the devices of line i (offset
/// (i + 1/2) delta_y) onto the radial axis through the test gateway.
inline double compression_factor(double gamma, int i, double delta_y)
{
    const double offset = (i + 0.5) * delta_y;
    if (!(gamma >= offset * (1.0 - 1e-12)))
        throw DomainError("compression_factor: distance is below the line offset");
    const double along = std::sqrt(std::max(0.0, gamma * gamma - offset * offset));
    const double u = 2.0 * along + 1.0;
    // 1 / (sqrt(gamma^2 + u) - gamma), rationalised to avoid cancellation
    return (std::sqrt(gamma * gamma + u) + gamma) / u;
}

/// Everything the analytical expressions need from a configured network.
struct AnalyticModel {
    double eta = 4.0;
    double delta_x = 25.0;
    double delta_y = 200.0;
    double cell_radius = 490.0;
    int devices_per_cell = 120;
    double noise_w = 0.0;
    double constant_power_w = 1.0;
    double rho_w = 1.0;
    double mean_sq_distance = 0.0; ///< E{r^2} of the in-cell devices
    AntennaPattern pattern{};

    /// Density of active interferers, 1 / (N_G delta_x delta_y).
    double active_density() const { return 1.0 / (devices_per_cell * delta_x * delta_y); }
    /// Radius of the interference-free disc, sqrt(3) R / 2.
    double guard_radius() const { return std::numbers::sqrt3 * cell_radius / 2.0; }
    /// Gain product of the perfectly aligned intended link.
    double intended_gain(Directivity d) const { return std::pow(pattern.peak(), directional_ends(d)); }

    static AnalyticModel from(const NetworkConfig& config, const GridLayout& layout)
    {
        AnalyticModel m;
        m.eta = config.path_loss_eta;
        m.delta_x = config.delta_x;
        m.delta_y = config.delta_y;
        m.cell_radius = config.cell_radius;
        m.devices_per_cell = devices_per_gateway(config.delta_x, config.delta_y, config.cell_radius).devices;
        m.noise_w = config.noise_w;
        m.rho_w = config.rho_w;
        m.constant_power_w = constant_power(config, layout);
        m.mean_sq_distance = second_moment_distance(layout);
        m.pattern = AntennaPattern{config.beam_b, config.lobes_n};
        return m;
    }

    static AnalyticModel from(const NetworkConfig& config)
    {
        return from(config, build_grid(config));
    }
};

namespace detail {

inline quad::Tolerance angular_tolerance() { return {1e-9, 1e-11, 4000}; }
inline quad::Tolerance radial_tolerance() { return {1e-9, 1e-11, 4000}; }

/// Integral over theta in [0, 2 pi) of f(G(theta)). The full period makes the
/// lobe count irrelevant and the pattern is even, so [0, pi] suffices.
template <class F>
double full_turn(const AntennaPattern& g, F&& f)
{
    if (g.b == 0.0) return 2.0 * std::numbers::pi * f(1.0);
    auto integrand = [&](double phi) { return f(1.0 + g.b * std::cos(phi)); };
    return 2.0 * quad::integrate(integrand, 0.0, std::numbers::pi, angular_tolerance());
}

/// Integral over theta in [pi/2, 3 pi/2] of f(G(theta)): devices that face
/// away from the test gateway.
template <class F>
double back_half_turn(const AntennaPattern& g, F&& f)
{
    if (g.b == 0.0) return std::numbers::pi * f(1.0);
    auto integrand = [&](double theta) { return f(g(theta)); };
    return quad::integrate(integrand, std::numbers::pi / 2.0, 1.5 * std::numbers::pi,
                           angular_tolerance());
}

/// integral_c^inf v / (1 + v^eta / k) dv = k c^(2-eta) / (eta-2) 2F1(.; -k / c^eta)
inline double ppp_kernel(double c, double k, double eta)
{
    if (k <= 0.0) return 0.0;
    return k * std::pow(c, 2.0 - eta) / (eta - 2.0) * hyp2f1_eta(k / std::pow(c, eta), eta);
}

/// Interference exponent of the 2D-PPP field under Approximation 1.
///
/// `inner` and `outer` bound the back-facing ring, `gain_scale * G1 * G2` is
/// the kernel's k, and `weight` multiplies the final integral (lambda for
/// constant power, lambda E{r^2} under path-loss inversion).
inline double ppp_exponent(Directivity dir, const AntennaPattern& pattern, double inner,
                           double outer, double gain_scale, double eta, double weight)
{
    const AntennaPattern omni{0.0, 1};
    const AntennaPattern& gw = dir == Directivity::OgwOn ? omni : pattern;
    const bool device_directional = dir == Directivity::DgwDn;

    auto over_device = [&](double g1) {
        if (!device_directional) return ppp_kernel(inner, gain_scale * g1, eta);
        const double ring = back_half_turn(pattern, [&](double g2) {
            const double k = gain_scale * g1 * g2;
            return ppp_kernel(inner, k, eta) - ppp_kernel(outer, k, eta);
        });
        const double far = full_turn(pattern, [&](double g2) {
            return ppp_kernel(outer, gain_scale * g1 * g2, eta);
        });
        return ring / std::numbers::pi + far / (2.0 * std::numbers::pi);
    };
    return weight * full_turn(gw, over_device);
}

} // namespace detail

/// Segment success probability under the 2D-PPP approximation with constant
/// transmit power, for a device at distance r_o from the test gateway.
inline double success_prob_2d(Directivity dir, double xi, double r_o, const AnalyticModel& m)
{
    if (!(xi >= 0.0)) throw DomainError("success_prob_2d: threshold must be non-negative");
    if (!(r_o > 0.0)) throw DomainError("success_prob_2d: link distance must be positive");
    const double g0 = m.intended_gain(dir);
    const double k = xi * std::pow(r_o, m.eta) / g0;
    const double noise = k * m.noise_w / m.constant_power_w;
    const double a = m.guard_radius();
    double interference = 0.0;
    if (dir == Directivity::OgwOn || m.pattern.b == 0.0) {
        interference = 2.0 * std::numbers::pi * m.active_density() * detail::ppp_kernel(a, k, m.eta);
    } else {
        interference = detail::ppp_exponent(dir, m.pattern, a, 2.0 * a, k, m.eta, m.active_density());
    }
    return std::exp(-noise - interference);
}

/// Segment success probability under the 2D-PPP approximation with path-loss
/// inversion power control (independent of the device position).
inline double success_prob_2d_pc(Directivity dir, double xi, const AnalyticModel& m)
{
    if (!(xi >= 0.0)) throw DomainError("success_prob_2d_pc: threshold must be non-negative");
    if (!(m.mean_sq_distance > 0.0)) throw DomainError("success_prob_2d_pc: E{r^2} must be positive");
    const double g0 = m.intended_gain(dir);
    const double k = xi / g0;
    const double noise = xi * m.noise_w / (g0 * m.rho_w);
    const double weight = m.active_density() * m.mean_sq_distance;
    double interference = 0.0;
    if (dir == Directivity::OgwOn || m.pattern.b == 0.0) {
        interference = 2.0 * std::numbers::pi * weight * detail::ppp_kernel(1.0, k, m.eta);
    } else {
        interference = detail::ppp_exponent(dir, m.pattern, 1.0, 3.0, k, m.eta, weight);
    }
    return std::exp(-noise - interference);
}

/// Controls the infinite sum over device lines in the 1D-PPPs expressions.
struct LineSumOptions {
    /// Stop once a line adds less than this to the exponent.
    double stop_below = 1e-8;
    /// When set, sum exactly this many lines on each side of the gateway
    /// (a finite window) instead of running to convergence.
    std::optional<int> lines_per_side;
};

struct LineSumReport {
    double exponent = 0.0;
    int lines_per_side = 0;
};

/// Interference exponent of the parallel 1D-PPPs approximation.
inline LineSumReport line_sum_exponent(Directivity dir, double k, const AnalyticModel& m,
                                       const LineSumOptions& opts = {})
{
    const double a = m.guard_radius();
    const double edge = 2.0 * a; // sqrt(3) R
    const double line_density = 1.0 / (m.delta_x * m.devices_per_cell);
    const AntennaPattern omni{0.0, 1};
    const AntennaPattern& gw = dir == Directivity::OgwOn ? omni : m.pattern;
    const bool device_directional = dir == Directivity::DgwDn && m.pattern.b != 0.0;
    const auto tol = detail::radial_tolerance();

    // Integrated along the line, gamma = sqrt(offset^2 + s^2), which keeps the
    // integrand smooth where the line is closest to the gateway.
    auto radial = [&](int i, double lo, double hi, double kk) {
        if (kk <= 0.0 || hi <= lo) return 0.0;
        const double offset = (i + 0.5) * m.delta_y;
        auto along = [&](double gamma) { return std::sqrt(std::max(0.0, (gamma - offset) * (gamma + offset))); };
        auto f = [&](double s) {
            const double gamma = std::hypot(offset, s);
            const double c = 1.0 / (std::sqrt(gamma * gamma + 2.0 * s + 1.0) - gamma);
            return c * s / gamma / (1.0 + std::pow(gamma, m.eta) / kk);
        };
        const double s_lo = along(lo);
        if (std::isinf(hi)) return quad::integrate_semi_infinite(f, s_lo, std::max(lo, 1.0), tol);
        return quad::integrate(f, s_lo, along(hi), tol);
    };

    auto line_term = [&](int i) {
        const double offset = (i + 0.5) * m.delta_y;
        const double start = std::max(offset, a);
        const double inf = std::numeric_limits<double>::infinity();
        if (!device_directional) {
            // theta_2 integrates out: pi * 2C on the ring plus 2 pi * C beyond.
            const double turn = detail::full_turn(gw, [&](double g1) { return radial(i, start, inf, k * g1); });
            return 2.0 * line_density / std::numbers::pi * turn;
        }
        const double far_start = std::max(offset, edge);
        auto over_device = [&](double g1) {
            double ring = 0.0;
            if (offset < edge) {
                ring = detail::back_half_turn(m.pattern, [&](double g2) {
                    return 2.0 * radial(i, start, edge, k * g1 * g2);
                });
            }
            const double far = detail::full_turn(m.pattern, [&](double g2) {
                return radial(i, far_start, inf, k * g1 * g2);
            });
            return ring + far;
        };
        return line_density / (std::numbers::pi * std::numbers::pi) * detail::full_turn(gw, over_device);
    };

    LineSumReport report;
    const int min_lines = static_cast<int>(std::ceil(3.0 * m.cell_radius / m.delta_y));
    constexpr int hard_cap = 100000;
    for (int i = 0;; ++i) {
        if (opts.lines_per_side && i >= *opts.lines_per_side) break;
        if (i >= hard_cap) throw NumericError("1D-PPPs line sum did not converge");
        const double term = line_term(i);
        report.exponent += term;
        report.lines_per_side = i + 1;
        if (!opts.lines_per_side && term < opts.stop_below && i + 1 >= min_lines) break;
    }
    return report;
}

/// Segment success probability under the parallel 1D-PPPs approximation
/// (constant transmit power only).
inline double success_prob_1d(Directivity dir, double xi, double r_o, const AnalyticModel& m,
                              const LineSumOptions& opts = {})
{
    if (!(xi >= 0.0)) throw DomainError("success_prob_1d: threshold must be non-negative");
    if (!(r_o > 0.0)) throw DomainError("success_prob_1d: link distance must be positive");
    const double g0 = m.intended_gain(dir);
    const double k = xi * std::pow(r_o, m.eta) / g0;
    const double noise = k * m.noise_w / m.constant_power_w;
    if (k == 0.0) return std::exp(-noise);
    return std::exp(-noise - line_sum_exponent(dir, k, m, opts).exponent);
}

/// Dispatches on the scenario's power mode and approximation. r_o is ignored
/// under power control. Monte Carlo scenarios are handled by montecarlo.hpp.
inline double success_prob(const Scenario& s, double xi, double r_o, const AnalyticModel& m,
                           const LineSumOptions& opts = {})
{
    if (s.approximation == Approximation::MonteCarlo)
        throw DomainError("success_prob: Monte Carlo scenarios are simulated, not evaluated");
    if (s.power == PowerMode::Inversion) {
        if (s.approximation == Approximation::OneDPpp)
            throw DomainError("the 1D-PPPs approximation is only defined for constant power");
        return success_prob_2d_pc(s.directivity, xi, m);
    }
    if (s.approximation == Approximation::OneDPpp) return success_prob_1d(s.directivity, xi, r_o, m, opts);
    return success_prob_2d(s.directivity, xi, r_o, m);
}

struct CurvePoint {
    double xi_db = 0.0;
    double p = 0.0;
};

struct SuccessCurve {
    Scenario scenario{};
    std::optional<double> link_distance; ///< r_o, absent under power control
    std::vector<CurvePoint> points;
};

inline SuccessCurve success_curve(const Scenario& s, std::span<const double> xi_db, double r_o,
                                  const AnalyticModel& m, const LineSumOptions& opts = {})
{
    SuccessCurve curve;
    curve.scenario = s;
    if (s.power == PowerMode::Constant) curve.link_distance = r_o;
    curve.points.reserve(xi_db.size());
    for (double db : xi_db) curve.points.push_back({db, success_prob(s, db_to_linear(db), r_o, m, opts)});
    return curve;
}

} // namespace gridiot
