// Walks the reference deployment end to end: success probability at a few
// thresholds, the segmentation table and the delay tail at m*.
#include <cstdio>

#include "gridiot/gridiot.hpp"

using namespace gridiot;

int main()
{
    const NetworkConfig config;
    const GridLayout layout = build_grid(config);
    const AnalyticModel model = AnalyticModel::from(config, layout);
    std::printf("N_G = %d, central cell holds %d devices, P = %.4g mW\n", model.devices_per_cell,
                layout.devices_per_cell, model.constant_power_w * 1e3);

    const Directivity all[] = {Directivity::DgwDn, Directivity::DgwOn, Directivity::OgwOn};
    std::printf("\n%-8s %10s %10s %10s\n", "xi [dB]", "dgw-dn", "dgw-on", "ogw-on");
    for (double db : {-5.0, 0.0, 5.0, 10.0}) {
        std::printf("%-8.1f", db);
        for (Directivity d : all)
            std::printf(" %10.4f", success_prob_2d_pc(d, db_to_linear(db), model));
        std::printf("\n");
    }

    const TrafficShape shape = traffic_shape(config, model.devices_per_cell);
    for (Directivity d : all) {
        const auto plan = optimal_segments(shape, config, analytic_success({d, PowerMode::Inversion,
                                                                             Approximation::TwoDPpp}, model));
        const SegmentRow& best = plan.rows[static_cast<std::size_t>(plan.m_star - 1)];
        const QueueSolution q = solve_queue(best.m, best.p, shape.arrival_cycles, shape.cycle_seconds);
        const DelayPmf pmf = delay_pmf(q.model, q.stationary);
        std::printf("\n%s: m* = %d, p = %.4f, mean delay %.3f cycles (%.2f s), P{W < 10} = %.4f\n",
                    std::string(to_string(d)).c_str(), best.m, best.p, best.mean_delay_cycles,
                    best.mean_delay_seconds, pmf.cdf_below(10));
    }
}
