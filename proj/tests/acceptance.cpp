// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "gridiot/gridiot.hpp"
#include "gridiot/quadrature.hpp"

using namespace gridiot;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void run(int id, const char* title, const std::function<Verdict()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failures;
    std::printf("criterion %2d: %s  %s (%.2f s)%s%s\n", id, v.pass ? "PASS" : "FAIL", title, secs,
                v.detail.empty() ? "" : "  ", v.detail.c_str());
    std::fflush(stdout);
}

struct Setup {
    NetworkConfig config;
    GridLayout layout;
    AnalyticModel model;
};

const Setup& setup()
{
    static const Setup s = [] {
        Setup out;
        out.layout = build_grid(out.config);
        out.model = AnalyticModel::from(out.config, out.layout);
        return out;
    }();
    return s;
}

constexpr Directivity all_dirs[] = {Directivity::DgwDn, Directivity::DgwOn, Directivity::OgwOn};

// Reference curves, thresholds -10..10 dB in 1 dB steps.
constexpr double omni_constant_ref[21] = {
    0.970153494120293, 0.962631259428523, 0.953277882656906, 0.941683771884944, 0.927367629805935,
    0.90977490155846,  0.888283127367683, 0.862218168622368, 0.830886147621605, 0.793626229249444,
    0.749888378390371, 0.699337074133658, 0.641975888543252, 0.578278762722107, 0.509303064485051,
    0.436750310296672, 0.362937516084961, 0.290650165996855, 0.222868976660291, 0.162394904612737,
    0.11143348292807};
constexpr double omni_inversion_ref[21] = {
    0.943931874179444, 0.930371679767341, 0.913807487868227, 0.893712282198062, 0.869532236200165,
    0.840717021477718, 0.806763479916699, 0.767272500137497, 0.722016290549924, 0.671010119946092,
    0.614579776555315, 0.553414330825562, 0.488593742009962, 0.421582182850649, 0.354179911711506,
    0.28842855604579,  0.226467288181167, 0.170342375882429, 0.121782317745266, 0.0819663145862249,
    0.0513325745199281};

Verdict geometry()
{
    Verdict v;
    const CellCount c = devices_per_gateway(25.0, 200.0, 490.0);
    const int Ta = cycles_between_arrivals(21.6, c.devices, 10e-3);
    v.check(c.devices == 120, fmt("N_G = %d", c.devices));
    v.check(Ta == 18, fmt("T_a = %d", Ta));
    v.detail = v.pass ? fmt("N_G = %d, T_a = %d", c.devices, Ta) : v.detail;
    return v;
}

Verdict closed_forms()
{
    Verdict v;
    const AnalyticModel& m = setup().model;
    double worst_c = 0.0, worst_pc = 0.0;
    for (int i = 0; i <= 20; ++i) {
        const double xi = db_to_linear(i - 10.0);
        worst_c = std::max(worst_c, std::abs(success_prob_2d(Directivity::OgwOn, xi, 300.0, m) - omni_constant_ref[i]));
        worst_pc = std::max(worst_pc, std::abs(success_prob_2d_pc(Directivity::OgwOn, xi, m) - omni_inversion_ref[i]));
    }
    v.check(worst_c <= 1e-3, fmt("constant-power gap %.2e", worst_c));
    v.check(worst_pc <= 1e-3, fmt("power-control gap %.2e", worst_pc));
    const double p0 = success_prob_2d(Directivity::OgwOn, 1.0, 300.0, m);
    const double p10 = success_prob_2d(Directivity::OgwOn, 10.0, 300.0, m);
    const double q0 = success_prob_2d_pc(Directivity::OgwOn, 1.0, m);
    const double q10 = success_prob_2d_pc(Directivity::OgwOn, 10.0, m);
    if (v.pass)
        v.detail = fmt("constant %.5f / %.5f, inversion %.5f / %.5f at 0 / 10 dB; max gaps %.1e, %.1e", p0, p10, q0,
                       q10, worst_c, worst_pc);
    return v;
}

Verdict integral_theorems()
{
    Verdict v;
    const AnalyticModel& m = setup().model;
    const double dd0 = success_prob_2d(Directivity::DgwDn, 1.0, 300.0, m);
    const double dd10 = success_prob_2d(Directivity::DgwDn, 10.0, 300.0, m);
    const double line0 = success_prob_1d(Directivity::DgwDn, 1.0, 300.0, m);
    const double pc0 = success_prob_2d_pc(Directivity::DgwDn, 1.0, m);
    v.check(std::abs(dd0 - 0.9534) <= 2e-3, fmt("2D dgw-dn 0 dB %.5f", dd0));
    v.check(std::abs(dd10 - 0.6388) <= 2e-3, fmt("2D dgw-dn 10 dB %.5f", dd10));
    v.check(std::abs(line0 - 0.9545) <= 2e-3, fmt("1D dgw-dn 0 dB %.5f", line0));
    v.check(std::abs(pc0 - 0.92733) <= 2e-3, fmt("inversion dgw-dn 0 dB %.5f", pc0));
    if (v.pass)
        v.detail = fmt("2D %.4f / %.4f, 1D %.4f, inversion %.5f", dd0, dd10, line0, pc0);
    return v;
}

Verdict monte_carlo()
{
    Verdict v;
    const Setup& s = setup();
    const SimPhysics phy = SimPhysics::from(s.config, s.layout);
    std::vector<double> grid;
    for (int i = -10; i <= 10; ++i) grid.push_back(i);
    std::string summary;
    for (PowerMode pw : {PowerMode::Constant, PowerMode::Inversion}) {
        for (Directivity d : all_dirs) {
            SimConfig cfg;
            cfg.scenario = {d, pw, Approximation::MonteCarlo};
            cfg.trials = 50'000;
            cfg.seed = 1;
            cfg.xi_db = grid;
            const SimResult r = estimate_success(s.layout, phy, cfg);
            double worst_ratio = 0.0, at = 0.0, gap_at = 0.0, p_at = 0.0, a_at = 0.0;
            for (const auto& p : r.points) {
                const double a = success_prob({d, pw, Approximation::TwoDPpp}, db_to_linear(p.xi_db), 300.0, s.model);
                const double tol = std::max(0.02, 3.0 * p.ci_halfwidth);
                const double ratio = std::abs(p.p_hat - a) / tol;
                if (ratio > worst_ratio) {
                    worst_ratio = ratio;
                    at = p.xi_db;
                    gap_at = std::abs(p.p_hat - a);
                    p_at = p.p_hat;
                    a_at = a;
                }
            }
            const std::string name = std::string(to_string(d)) + "/" + std::string(to_string(pw));
            summary += fmt("%s%s %.2f", summary.empty() ? "" : ", ", name.c_str(), worst_ratio);
            v.check(worst_ratio <= 1.0, fmt("%s at %+.0f dB: simulated %.4f vs analysis %.4f (gap %.4f)",
                                            name.c_str(), at, p_at, a_at, gap_at));
        }
    }
    v.detail = "worst gap / tolerance: " + summary + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

Verdict queueing_pipeline()
{
    Verdict v;
    const Setup& s = setup();
    const TrafficShape shape = traffic_shape(s.config, s.model.devices_per_cell);
    const int expect_m[] = {3, 5, 7};
    const double expect_w[] = {5.3845, 9.5281, 16.188};
    std::string summary;
    for (int i = 0; i < 3; ++i) {
        const auto plan = optimal_segments(
            shape, s.config, analytic_success({all_dirs[i], PowerMode::Inversion, Approximation::TwoDPpp}, s.model));
        const SegmentRow& row = plan.rows[static_cast<std::size_t>(expect_m[i] - 1)];
        const double rel = std::abs(row.mean_delay_cycles - expect_w[i]) / expect_w[i];
        v.check(plan.m_star == expect_m[i], fmt("%s m* = %d", std::string(to_string(all_dirs[i])).c_str(), plan.m_star));
        v.check(rel <= 0.02, fmt("%s mu_W = %.4f", std::string(to_string(all_dirs[i])).c_str(), row.mean_delay_cycles));
        summary += fmt("%s%s m*=%d mu_W=%.4f", i ? ", " : "", std::string(to_string(all_dirs[i])).c_str(), plan.m_star,
                       row.mean_delay_cycles);
    }
    if (v.pass) v.detail = summary;
    return v;
}

Verdict delay_cdf()
{
    Verdict v;
    const Setup& s = setup();
    const TrafficShape shape = traffic_shape(s.config, s.model.devices_per_cell);
    const double p = success_prob_2d_pc(Directivity::DgwDn,
                                        sinr_threshold(s.config.packet_bits, 3, s.config.rate_gap_zeta,
                                                       s.config.bandwidth_hz, s.config.slot_s).xi,
                                        s.model);
    const QueueSolution q = solve_queue(3, p, shape.arrival_cycles, shape.cycle_seconds);
    const DelayPmf pmf = delay_pmf(q.model, q.stationary);
    // The reference counts the generation cycle, so its CDF(w) is P{W < w} here.
    const double value = pmf.cdf_below(10);
    const double rel = std::abs(value - 0.95451) / 0.95451;
    v.check(rel <= 0.01, fmt("CDF(10) = %.5f", value));
    v.detail = fmt("P{W < 10} = %.5f (rel. gap %.1e), P{W <= 10} = %.5f", value, rel, pmf.cdf(10));
    return v;
}

Verdict oracle_equivalence()
{
    Verdict v;
    struct P {
        int m;
        double p;
        int Ta;
    };
    std::string summary;
    for (const P& s : {P{3, 0.5566, 18}, P{1, 0.9, 4}, P{5, 0.5, 18}}) {
        const QueueSolution q = solve_queue(s.m, s.p, s.Ta);
        const DelayPmf pmf = delay_pmf(q.model, q.stationary);
        const auto delays = queue_des_oracle(s.m, s.p, s.Ta, 1'000'000, 2024);
        const double ks = ks_distance(pmf, delays);
        const MatrixXd vi = solve_rate_matrix_iterative(q.model.A0, q.model.A1, q.model.A2);
        const double diff = (vi - q.stationary.R).cwiseAbs().maxCoeff();
        v.check(ks < 0.01, fmt("(%d, %g, %d) KS %.4f", s.m, s.p, s.Ta, ks));
        v.check(diff <= 1e-10, fmt("(%d, %g, %d) |R_vi - R_cr| %.1e", s.m, s.p, s.Ta, diff));
        summary += fmt("%s(%d, %g, %d) KS %.5f |dR| %.0e", summary.empty() ? "" : ", ", s.m, s.p, s.Ta, ks, diff);
    }
    if (v.pass) v.detail = summary;
    return v;
}

Verdict stability()
{
    Verdict v;
    const int m = 3, Ta = 18;
    int flips_checked = 0;
    for (double p : {0.05, 0.10, 0.14, 0.15, 1.0 / 6.0, 0.1833, 0.20, 0.30, 0.55}) {
        const double rho = utilization(m, p, Ta);
        bool rejected = false;
        try {
            solve_queue(m, p, Ta);
        } catch (const UnstableQueueError&) {
            rejected = true;
        }
        v.check(rejected == (rho >= 1.0), fmt("analysis at p = %.4f", p));
        if (std::abs(rho - 1.0) < 1e-12) continue; // the edge itself is null-recurrent
        const bool divergent = looks_divergent(queue_des_oracle(m, p, Ta, 200'000, 77));
        v.check(divergent == (rho > 1.0), fmt("simulation at p = %.4f (rho %.3f) divergent=%d", p, rho, divergent));
        ++flips_checked;
    }
    if (v.pass) v.detail = fmt("%d probabilities around p = 1/6, analysis rejects rho >= 1", flips_checked);
    return v;
}

Verdict feasibility()
{
    Verdict v;
    const Setup& s = setup();
    std::vector<double> L;
    for (int kb = 10; kb <= 400; kb += 10) L.push_back(kb * 1e3);
    auto max_L = [&](Directivity d, double tr, std::optional<int> cap) {
        FeasibilityOptions o;
        o.max_segments = cap;
        const auto reg = feasibility_region(L, std::vector<double>{tr}, s.config, s.model.devices_per_cell,
                                            analytic_success({d, PowerMode::Inversion, Approximation::TwoDPpp}, s.model), o);
        return reg.boundary.front().second / 1e3;
    };
    const double oo12 = max_L(Directivity::OgwOn, 12.0, std::nullopt);
    const double dd12 = max_L(Directivity::DgwDn, 12.0, std::nullopt);
    const double dd18 = max_L(Directivity::DgwDn, 21.6, 7);
    const double dd18_uncapped = max_L(Directivity::DgwDn, 21.6, std::nullopt);
    v.check(std::abs(oo12 - 50.0) <= 10.0, fmt("ogw-on at 12 s: %g kbit", oo12));
    v.check(std::abs(dd12 - 150.0) <= 10.0, fmt("dgw-dn at 12 s: %g kbit", dd12));
    v.check(std::abs(dd18 - 220.0) <= 10.0, fmt("dgw-dn at T_a = 18 with m <= 7: %g kbit", dd18));
    v.detail = fmt("ogw-on %g and dgw-dn %g kbit at 12 s; dgw-dn at T_a = 18: %g kbit with m <= 7 (%g kbit with any m < T_a)",
                   oo12, dd12, dd18, dd18_uncapped)
             + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

Verdict properties()
{
    Verdict v;
    for (double b : {0.0, 0.3, 1.0})
        for (int n : {1, 2, 4}) {
            const AntennaPattern a{b, n};
            const double mean = quad::integrate([&](double t) { return a(t); }, 0.0, 2.0 * std::numbers::pi)
                              / (2.0 * std::numbers::pi);
            v.check(std::abs(mean - 1.0) < 1e-12, fmt("gain mean %.15f for b=%g n=%d", mean, b, n));
        }

    const AnalyticModel& m = setup().model;
    for (Directivity d : all_dirs) {
        double last_c = 2.0, last_pc = 2.0;
        for (int db = -10; db <= 10; ++db) {
            const double c = success_prob_2d(d, db_to_linear(db), 300.0, m);
            const double pc = success_prob_2d_pc(d, db_to_linear(db), m);
            v.check(c < last_c && pc < last_pc, fmt("%s not decreasing at %d dB", std::string(to_string(d)).c_str(), db));
            last_c = c;
            last_pc = pc;
        }
        double last_r = 2.0;
        for (double r : {150.0, 250.0, 300.0, 350.0, 450.0}) {
            const double c = success_prob_2d(d, 1.0, r, m);
            v.check(c < last_r, fmt("%s not decreasing in r_o at %g m", std::string(to_string(d)).c_str(), r));
            last_r = c;
        }
    }

    for (auto [mm, p, Ta] : {std::tuple{3, 0.5566, 18}, std::tuple{5, 0.5, 18}, std::tuple{1, 0.9, 4}}) {
        const QueueSolution q = solve_queue(mm, p, Ta);
        v.check(std::abs(q.stationary.total_mass() - 1.0) < 1e-12, "pi not normalised");
        v.check(q.stationary.pi0.minCoeff() >= 0.0 && q.stationary.pi1.minCoeff() >= 0.0, "negative pi");
        const DelayPmf pmf = delay_pmf(q.model, q.stationary);
        double mass = 0.0;
        for (double x : pmf.pmf) mass += x;
        v.check(std::abs(mass - (1.0 - pmf.residual)) < 1e-12, "PMF mass differs from 1 - residual");
    }

    double worst = 0.0;
    for (double x : {1e-6, 0.01, 0.3, 0.5, 0.9, 2.0, 4.0, 7.5, 50.0, 1e3, 1e6})
        worst = std::max(worst, std::abs(hyp2f1_eta(x, 4.0) - std::atan(std::sqrt(x)) / std::sqrt(x)));
    v.check(worst < 1e-10, fmt("hypergeometric vs arctan %.1e", worst));
    if (v.pass) v.detail = fmt("gain mean, monotonicity, pi, PMF mass, hypergeometric (max err %.1e)", worst);
    return v;
}

} // namespace

int main()
{
    run(1, "cell geometry", geometry);
    run(2, "closed forms vs reference curves", closed_forms);
    run(3, "integral expressions", integral_theorems);
    run(4, "Monte Carlo vs 2D analysis", monte_carlo);
    run(5, "delay per segmentation", queueing_pipeline);
    run(6, "delay CDF at m* = 3", delay_cdf);
    run(7, "delay PMF vs simulation, rate-matrix solvers", oracle_equivalence);
    run(8, "stability dichotomy", stability);
    run(9, "feasibility region", feasibility);
    run(10, "property suites", properties);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
