#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "gridiot/config.hpp"
#include "gridiot/errors.hpp"
#include "gridiot/geometry.hpp"

namespace gridiot {

/// Radio parameters of the simulated network.
struct SimPhysics {
    double eta = 4.0;
    double noise_w = 0.0;
    double constant_power_w = 1.0;
    double rho_w = 1.0;
    AntennaPattern pattern{};

    static SimPhysics from(const NetworkConfig& c, const GridLayout& layout)
    {
        return {c.path_loss_eta, c.noise_w, constant_power(c, layout), c.rho_w,
                AntennaPattern{c.beam_b, c.lobes_n}};
    }
};

struct SimConfig {
    Scenario scenario{Directivity::DgwDn, PowerMode::Constant, Approximation::MonteCarlo};
    long trials = 50'000;
    std::uint64_t seed = 1;
    std::vector<double> xi_db;
    double link_distance = 300.0; ///< r_o for constant power
    /// Trials per in-cell position for the location breakdown (constant power only, 0 = off).
    long trials_per_location = 0;
    unsigned workers = 0; ///< 0 = hardware concurrency
};

struct SimPoint {
    double xi_db = 0.0;
    double p_hat = 0.0;
    double ci_halfwidth = 0.0;
};

struct LocationSpread {
    double xi_db = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

struct SimResult {
    Scenario scenario{};
    std::uint64_t seed = 0;
    long trials = 0;
    std::vector<SimPoint> points;
    std::vector<LocationSpread> locations;
    /// Upper bound on the share of mean interference that lies outside the window.
    double truncation_bound = 0.0;
    bool covers_near_field = false;
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent stream for block `block` of a run seeded with `seed`.
inline std::mt19937_64 block_stream(std::uint64_t seed, std::uint64_t block)
{
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(block + 0x632BE59BD9B4E019ull)));
}

/// 95% binomial half-width 1.96 sqrt(p (1 - p) / n).
inline double binomial_halfwidth(double p_hat, long trials)
{
    return 1.96 * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
}

/// Share of the mean interference (PPP with the guard disc removed) that
/// comes from beyond the largest disc inscribed in the window.
inline double truncation_bound(const GridLayout& layout, double eta)
{
    const double guard = std::numbers::sqrt3 * layout.cell_radius / 2.0;
    const double inner = std::min(layout.window_width, layout.window_height) / 2.0;
    if (inner <= guard) return 1.0;
    return std::pow(guard / inner, eta - 2.0);
}

/// Precomputed per-device quantities for fast slot sampling.
class SlotSampler {
public:
    SlotSampler(const GridLayout& layout, const SimPhysics& phy, const Scenario& s)
        : layout_(layout), phy_(phy), scenario_(s)
    {
        const std::size_t n = layout.devices.size();
        bearing_.resize(n);
        facing_offset_.resize(n);
        path_gain_.resize(n);
        tx_power_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const Point v = layout.devices[k];
            const Point own = layout.gateways[static_cast<std::size_t>(layout.association[k])];
            const double dist = norm(v);
            bearing_[k] = std::atan2(v.y, v.x);
            // Angle between the device's boresight (toward its gateway) and the origin.
            const Point to_own = own - v;
            facing_offset_[k] = std::atan2(-v.y, -v.x) - std::atan2(to_own.y, to_own.x);
            path_gain_[k] = dist > 0.0 ? std::pow(dist, -phy.eta) : std::numeric_limits<double>::infinity();
            tx_power_[k] = s.power == PowerMode::Constant ? phy.constant_power_w
                                                          : phy.rho_w * std::pow(norm(to_own), phy.eta);
        }
        gateway_directional_ = s.directivity != Directivity::OgwOn && phy.pattern.b != 0.0;
        device_directional_ = s.directivity == Directivity::DgwDn && phy.pattern.b != 0.0;
        intended_gain_ = std::pow(phy.pattern.peak(), directional_ends(s.directivity));
    }

    const GridLayout& layout() const { return layout_; }

    /// SINR at the origin gateway for a test device at `test`, with one
    /// uniformly chosen active device in every other cell.
    template <class Rng>
    double sinr(Point test, Rng& rng) const
    {
        std::exponential_distribution<double> fading(1.0);
        const double r = norm(test);
        const double rx = scenario_.power == PowerMode::Constant ? phy_.constant_power_w * std::pow(r, -phy_.eta)
                                                                 : phy_.rho_w;
        const double signal = rx * intended_gain_ * fading(rng);
        const double boresight = std::atan2(test.y, test.x);

        double interference = 0.0;
        for (std::size_t g = 1; g < layout_.gateways.size(); ++g) {
            const int begin = layout_.cell_begin[g];
            const int count = layout_.cell_begin[g + 1] - begin;
            if (count == 0) continue;
            std::uniform_int_distribution<int> pick(0, count - 1);
            const auto k = static_cast<std::size_t>(begin + pick(rng));
            double gain = 1.0;
            if (gateway_directional_) gain *= phy_.pattern(bearing_[k] - boresight);
            if (device_directional_) gain *= phy_.pattern(facing_offset_[k]);
            interference += tx_power_[k] * path_gain_[k] * gain * fading(rng);
        }
        const double denom = interference + phy_.noise_w;
        if (denom == 0.0) return std::numeric_limits<double>::infinity();
        return signal / denom;
    }

private:
    const GridLayout& layout_;
    SimPhysics phy_;
    Scenario scenario_;
    std::vector<double> bearing_;
    std::vector<double> facing_offset_;
    std::vector<double> path_gain_;
    std::vector<double> tx_power_;
    bool gateway_directional_ = false;
    bool device_directional_ = false;
    double intended_gain_ = 1.0;
};

/// One SINR sample; see SlotSampler. The test device sits at r_o on the
/// nearest line (constant power) or at a uniform in-cell position.
template <class Rng>
double simulate_slot(const GridLayout& layout, const SimPhysics& phy, const Scenario& s, Rng& rng,
                     double link_distance = 300.0)
{
    const SlotSampler sampler(layout, phy, s);
    Point test;
    if (s.power == PowerMode::Constant) {
        test = test_device_at(link_distance, layout.delta_y);
    } else {
        const auto cell = layout.cell(0);
        std::uniform_int_distribution<std::size_t> pick(0, cell.size() - 1);
        test = cell[pick(rng)];
    }
    return sampler.sinr(test, rng);
}

namespace detail {

inline constexpr long sim_block = 1024;

/// Success counts per threshold over `trials` slots, split into fixed blocks
/// so the result does not depend on the number of workers.
template <class PlaceTest>
std::vector<long> count_successes(const SlotSampler& sampler, const std::vector<double>& xi, long trials,
                                  std::uint64_t seed, unsigned workers, PlaceTest place)
{
    const long blocks = (trials + sim_block - 1) / sim_block;
    std::vector<std::vector<long>> per_block(static_cast<std::size_t>(blocks), std::vector<long>(xi.size(), 0));
    std::atomic<long> next{0};
    auto work = [&] {
        for (long b = next++; b < blocks; b = next++) {
            auto rng = block_stream(seed, static_cast<std::uint64_t>(b));
            const long n = std::min(sim_block, trials - b * sim_block);
            auto& counts = per_block[static_cast<std::size_t>(b)];
            for (long t = 0; t < n; ++t) {
                const double s = sampler.sinr(place(rng), rng);
                for (std::size_t j = 0; j < xi.size(); ++j)
                    if (s > xi[j]) ++counts[j];
            }
        }
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<long>(workers, blocks));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::vector<long> total(xi.size(), 0);
    for (const auto& c : per_block)
        for (std::size_t j = 0; j < xi.size(); ++j) total[j] += c[j];
    return total;
}

} // namespace detail

inline SimResult estimate_success(const GridLayout& layout, const SimPhysics& phy, const SimConfig& cfg)
{
    if (cfg.trials < 1) throw DomainError("estimate_success: need at least one trial");
    if (cfg.xi_db.empty()) throw DomainError("estimate_success: empty threshold grid");
    if (layout.cell(0).empty()) throw DomainError("estimate_success: central cell is empty");

    const SlotSampler sampler(layout, phy, cfg.scenario);
    std::vector<double> xi;
    for (double db : cfg.xi_db) xi.push_back(db_to_linear(db));

    SimResult out;
    out.scenario = cfg.scenario;
    out.seed = cfg.seed;
    out.trials = cfg.trials;
    out.truncation_bound = truncation_bound(layout, phy.eta);
    out.covers_near_field = layout.covers_near_field();

    const auto cell = layout.cell(0);
    std::vector<long> hits;
    if (cfg.scenario.power == PowerMode::Constant) {
        const Point test = test_device_at(cfg.link_distance, layout.delta_y);
        hits = detail::count_successes(sampler, xi, cfg.trials, cfg.seed, cfg.workers,
                                       [test](auto&) { return test; });
    } else {
        hits = detail::count_successes(sampler, xi, cfg.trials, cfg.seed, cfg.workers, [cell](auto& rng) {
            std::uniform_int_distribution<std::size_t> pick(0, cell.size() - 1);
            return cell[pick(rng)];
        });
    }
    for (std::size_t j = 0; j < xi.size(); ++j) {
        const double p = static_cast<double>(hits[j]) / static_cast<double>(cfg.trials);
        out.points.push_back({cfg.xi_db[j], p, binomial_halfwidth(p, cfg.trials)});
    }

    if (cfg.trials_per_location > 0 && cfg.scenario.power == PowerMode::Constant) {
        std::vector<double> sum(xi.size(), 0.0), sum_sq(xi.size(), 0.0);
        for (std::size_t k = 0; k < cell.size(); ++k) {
            const Point test = cell[k];
            const auto h = detail::count_successes(sampler, xi, cfg.trials_per_location,
                                                   splitmix64(cfg.seed + 1 + k), cfg.workers,
                                                   [test](auto&) { return test; });
            for (std::size_t j = 0; j < xi.size(); ++j) {
                const double p = static_cast<double>(h[j]) / static_cast<double>(cfg.trials_per_location);
                sum[j] += p;
                sum_sq[j] += p * p;
            }
        }
        const double n = static_cast<double>(cell.size());
        for (std::size_t j = 0; j < xi.size(); ++j) {
            const double mean = sum[j] / n;
            out.locations.push_back({cfg.xi_db[j], mean, std::sqrt(std::max(0.0, sum_sq[j] / n - mean * mean))});
        }
    }
    return out;
}

} // namespace gridiot
