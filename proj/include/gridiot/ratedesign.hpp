#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridiot/config.hpp"
#include "gridiot/errors.hpp"
#include "gridiot/queueing.hpp"
#include "gridiot/sinr_analysis.hpp"

namespace gridiot {

struct Throughput {
    double bits_per_s = 0.0;  ///< p zeta W log2(1 + xi)
    double nats_per_hz = 0.0; ///< p ln(1 + xi)
};

inline Throughput throughput(double p, double xi, double zeta, double bandwidth_hz)
{
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("throughput: p must lie in [0, 1]");
    if (!(xi >= 0.0)) throw DomainError("throughput: threshold must be non-negative");
    return {p * zeta * bandwidth_hz * std::log2(1.0 + xi), p * std::log1p(xi)};
}

/// Success probability as a function of the linear threshold.
using SuccessFunction = std::function<double(double)>;

/// Binds a scenario to the analytical model. r_o is used only with constant power.
inline SuccessFunction analytic_success(const Scenario& s, const AnalyticModel& m, double r_o = 300.0,
                                        const LineSumOptions& opts = {})
{
    return [s, m, r_o, opts](double xi) { return success_prob(s, xi, r_o, m, opts); };
}

/// Memoises a success function; thresholds recur across m and L grids.
inline SuccessFunction cached(SuccessFunction f)
{
    auto cache = std::make_shared<std::map<double, double>>();
    return [f = std::move(f), cache](double xi) {
        auto it = cache->find(xi);
        if (it != cache->end()) return it->second;
        const double p = f(xi);
        cache->emplace(xi, p);
        return p;
    };
}

struct SegmentRow {
    int m = 0;
    double xi = 0.0;
    double p = 0.0;
    double utilization = 0.0;
    bool stable = false;
    double mean_queue_length = std::numeric_limits<double>::quiet_NaN();
    double mean_delay_cycles = std::numeric_limits<double>::quiet_NaN();
    double mean_delay_seconds = std::numeric_limits<double>::quiet_NaN();
};

struct SegmentPlan {
    int arrival_cycles = 0;
    int m_star = 0;
    double mean_delay_star = 0.0; ///< cycles
    std::vector<SegmentRow> rows; ///< m = 1 .. T_a - 1
};

struct TrafficShape {
    double packet_bits = 0.0;
    int arrival_cycles = 1;
    double cycle_seconds = 0.0;
};

inline TrafficShape traffic_shape(const NetworkConfig& c, int devices_per_cell)
{
    return {c.packet_bits, cycles_between_arrivals(c.interarrival_s, devices_per_cell, c.slot_s),
            devices_per_cell * c.slot_s};
}

/// One row of the segmentation table. Queues with utilization >= 1 are
/// reported as unstable rather than solved.
inline SegmentRow evaluate_segments(int m, const TrafficShape& t, const NetworkConfig& c,
                                    const SuccessFunction& success)
{
    SegmentRow row;
    row.m = m;
    row.xi = sinr_threshold(t.packet_bits, m, c.rate_gap_zeta, c.bandwidth_hz, c.slot_s).xi;
    row.p = success(row.xi);
    row.utilization = utilization(m, row.p, t.arrival_cycles);
    row.stable = m < t.arrival_cycles && row.utilization < 1.0;
    if (row.stable) {
        const QueueSolution q = solve_queue(m, row.p, t.arrival_cycles, t.cycle_seconds);
        row.mean_queue_length = q.delay.mean_queue_length;
        row.mean_delay_cycles = q.delay.mean_delay_cycles;
        row.mean_delay_seconds = q.delay.mean_delay_seconds;
    }
    return row;
}

/// Exhaustive scan of m = 1 .. T_a - 1 for the delay-minimising segmentation.
inline SegmentPlan optimal_segments(const TrafficShape& t, const NetworkConfig& c,
                                    const SuccessFunction& success)
{
    SegmentPlan plan;
    plan.arrival_cycles = t.arrival_cycles;
    for (int m = 1; m < t.arrival_cycles; ++m) {
        plan.rows.push_back(evaluate_segments(m, t, c, success));
        const SegmentRow& r = plan.rows.back();
        if (r.stable && (plan.m_star == 0 || r.mean_delay_cycles < plan.mean_delay_star)) {
            plan.m_star = m;
            plan.mean_delay_star = r.mean_delay_cycles;
        }
    }
    if (plan.m_star == 0)
        throw UnstableQueueError("infeasible granularity: no m < T_a = " + std::to_string(t.arrival_cycles)
                                 + " gives a stable queue for L = " + std::to_string(t.packet_bits) + " bits");
    return plan;
}

inline SegmentPlan optimal_segments(const NetworkConfig& c, const Scenario& s, const AnalyticModel& m,
                                    double r_o = 300.0)
{
    return optimal_segments(traffic_shape(c, m.devices_per_cell), c, analytic_success(s, m, r_o));
}

struct FeasibilityCell {
    double packet_bits = 0.0;
    double interarrival_s = 0.0;
    int arrival_cycles = 0;
    bool feasible = false;
    int m_lowest_load = 0; ///< m with the smallest utilization (0 if none below T_a)
    double lowest_load = std::numeric_limits<double>::infinity();
    int m_star = 0;        ///< delay-optimal m, filled when delays are evaluated
    double mean_delay_s = std::numeric_limits<double>::quiet_NaN();
};

struct FeasibilityOptions {
    /// Also solve the queues for the delay-optimal m.
    bool evaluate_delay = false;
    /// Stricter variant: require mean delay <= budget (seconds). Implies evaluate_delay.
    std::optional<double> delay_budget_s;
    /// Largest segmentation a device supports; unset means any m < T_a.
    std::optional<int> max_segments;
};

struct FeasibilityRegion {
    std::vector<FeasibilityCell> cells; ///< row-major over (interarrival, packet size)
    /// Largest feasible packet size per inter-arrival time (NaN when none).
    std::vector<std::pair<double, double>> boundary;
};

/// (L, T_r) is feasible when some m < T_a gives a stable queue.
inline FeasibilityRegion feasibility_region(std::span<const double> packet_bits,
                                            std::span<const double> interarrival_s, const NetworkConfig& c,
                                            int devices_per_cell, const SuccessFunction& success,
                                            const FeasibilityOptions& opts = {})
{
    const SuccessFunction p_of = cached(success);
    const bool with_delay = opts.evaluate_delay || opts.delay_budget_s.has_value();
    FeasibilityRegion out;
    for (double tr : interarrival_s) {
        const int Ta = cycles_between_arrivals(tr, devices_per_cell, c.slot_s);
        double best_L = std::numeric_limits<double>::quiet_NaN();
        for (double L : packet_bits) {
            FeasibilityCell cell;
            cell.packet_bits = L;
            cell.interarrival_s = tr;
            cell.arrival_cycles = Ta;
            const TrafficShape shape{L, Ta, devices_per_cell * c.slot_s};
            double best_delay = std::numeric_limits<double>::infinity();
            const int m_end = opts.max_segments ? std::min(Ta, *opts.max_segments + 1) : Ta;
            for (int m = 1; m < m_end; ++m) {
                const double xi = sinr_threshold(L, m, c.rate_gap_zeta, c.bandwidth_hz, c.slot_s).xi;
                const double rho = utilization(m, p_of(xi), Ta);
                if (rho < cell.lowest_load) {
                    cell.lowest_load = rho;
                    cell.m_lowest_load = m;
                }
                if (!(rho < 1.0) || !with_delay) continue;
                const SegmentRow row = evaluate_segments(m, shape, c, p_of);
                if (row.mean_delay_seconds < best_delay) {
                    best_delay = row.mean_delay_seconds;
                    cell.m_star = m;
                    cell.mean_delay_s = row.mean_delay_seconds;
                }
            }
            cell.feasible = cell.lowest_load < 1.0;
            if (opts.delay_budget_s) cell.feasible = cell.feasible && best_delay <= *opts.delay_budget_s;
            if (cell.feasible && !(L <= best_L)) best_L = L;
            out.cells.push_back(cell);
        }
        out.boundary.emplace_back(tr, best_L);
    }
    return out;
}

} // namespace gridiot
