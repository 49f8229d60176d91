#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridiot/gridiot.hpp"

#ifndef GRIDIOT_VERSION
#define GRIDIOT_VERSION "0.0.0"
#endif

namespace {

using namespace gridiot;

enum ExitCode { Ok = 0, ConfigFailure = 2, NumericFailure = 3, ValidationFailure = 4 };

struct Options {
    std::string config_path;
    std::string scenario = "all";
    std::string power;
    std::string approx = "2d";
    std::uint64_t seed = 1;
    long trials = 50'000;
    std::string out;

    double xi_min = -10.0, xi_max = 10.0, xi_step = 1.0;
    double r_o = 300.0;
    std::optional<int> lines_per_side;

    int m_min = 1, m_max = 0;
    std::optional<int> m;
    int max_cycles = 10'000;

    double l_min_kbits = 10.0, l_max_kbits = 400.0, l_step_kbits = 10.0;
    int ta_min = 1, ta_max = 30;
    std::optional<double> delay_budget_s;
    std::optional<int> max_segments;
    bool with_delay = false;
};

struct Context {
    NetworkConfig config;
    GridLayout layout;
    AnalyticModel model;
};

Context load(const Options& o)
{
    Context ctx;
    ctx.config = o.config_path.empty() ? NetworkConfig{} : load_config(o.config_path);
    if (!o.power.empty()) ctx.config.power_mode = parse_power_mode(o.power);
    ctx.layout = build_grid(ctx.config);
    ctx.model = AnalyticModel::from(ctx.config, ctx.layout);
    return ctx;
}

std::vector<Directivity> scenarios(const Options& o)
{
    if (o.scenario == "all") return {Directivity::DgwDn, Directivity::DgwOn, Directivity::OgwOn};
    return {parse_directivity(o.scenario)};
}

std::vector<PowerMode> power_modes(const Options& o, const NetworkConfig& c, bool both_by_default)
{
    if (!o.power.empty()) return {parse_power_mode(o.power)};
    if (both_by_default) return {PowerMode::Constant, PowerMode::Inversion};
    return {c.power_mode};
}

std::vector<double> xi_grid(const Options& o)
{
    if (!(o.xi_step > 0.0) || o.xi_min > o.xi_max)
        throw ConfigError("empty threshold range [" + format_number(o.xi_min) + ", " + format_number(o.xi_max) + "]");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((o.xi_max - o.xi_min) / o.xi_step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(o.xi_min + i * o.xi_step);
    return out;
}

LineSumOptions line_options(const Options& o)
{
    LineSumOptions l;
    l.lines_per_side = o.lines_per_side;
    return l;
}

std::string scenario_label(Directivity d, PowerMode p)
{
    return std::string(to_string(d)) + "/" + std::string(to_string(p));
}

/// Output stream plus the manifest written next to it.
class Output {
public:
    Output(const Options& o, std::string command, const std::vector<std::string>& argv)
        : path_(o.out), command_(std::move(command)), argv_(argv), start_(std::chrono::steady_clock::now())
    {
        if (!path_.empty()) {
            file_ = std::make_unique<std::ofstream>(path_);
            if (!*file_) throw ConfigError("cannot write '" + path_ + "'");
        }
    }

    std::ostream& stream() { return file_ ? *file_ : std::cout; }

    void note(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

    void finish(const NetworkConfig& c, std::uint64_t seed)
    {
        if (!file_) return;
        file_->close();
        std::ostringstream cfg;
        write_config(cfg, c);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        nlohmann::json m{{"tool", "gridiot"},       {"version", GRIDIOT_VERSION}, {"command", command_},
                         {"arguments", argv_},      {"seed", seed},               {"config", cfg.str()},
                         {"outputs", {path_}},      {"wall_clock_s", wall}};
        for (auto& [k, v] : extra_.items()) m[k] = v;
        std::ofstream(path_ + ".manifest.json") << m.dump(2) << '\n';
    }

private:
    std::string path_;
    std::string command_;
    std::vector<std::string> argv_;
    std::chrono::steady_clock::time_point start_;
    std::unique_ptr<std::ofstream> file_;
    nlohmann::json extra_ = nlohmann::json::object();
};

SimConfig sim_config(const Options& o, Directivity d, PowerMode p, const std::vector<double>& grid)
{
    SimConfig s;
    s.scenario = {d, p, Approximation::MonteCarlo};
    s.trials = o.trials;
    s.seed = o.seed;
    s.xi_db = grid;
    s.link_distance = o.r_o;
    return s;
}

void report_window(const Context& ctx, Output& out)
{
    const double bound = truncation_bound(ctx.layout, ctx.config.path_loss_eta);
    std::cerr << "window: " << ctx.layout.gateways.size() << " cells, interference beyond the window <= "
              << format_number(bound) << " of the mean"
              << (ctx.layout.covers_near_field() ? "" : " (warning: window does not reach 3R)") << '\n';
    out.note("window_truncation_bound", bound);
    out.note("window_covers_3R", ctx.layout.covers_near_field());
}

int cmd_success(const Options& o, Output& out)
{
    const Context ctx = load(o);
    const auto grid = xi_grid(o);
    std::vector<Approximation> methods;
    if (o.approx == "both") methods = {Approximation::TwoDPpp, Approximation::OneDPpp};
    else if (o.approx == "2d") methods = {Approximation::TwoDPpp};
    else if (o.approx == "1d") methods = {Approximation::OneDPpp};
    else if (o.approx == "mc") methods = {Approximation::MonteCarlo};
    else if (o.approx == "all") methods = {Approximation::TwoDPpp, Approximation::OneDPpp, Approximation::MonteCarlo};
    else throw ConfigError("unknown approximation '" + o.approx + "' (expected 1d, 2d, both, mc or all)");

    CsvWriter csv(out.stream(), {"xi_dB", "scenario", "power", "method", "p", "ci_halfwidth"});
    for (PowerMode pw : power_modes(o, ctx.config, false)) {
        for (Directivity d : scenarios(o)) {
            for (Approximation a : methods) {
                if (a == Approximation::OneDPpp && pw == PowerMode::Inversion) continue;
                if (a == Approximation::MonteCarlo) {
                    report_window(ctx, out);
                    const SimPhysics phy = SimPhysics::from(ctx.config, ctx.layout);
                    const SimResult r = estimate_success(ctx.layout, phy, sim_config(o, d, pw, grid));
                    for (const auto& p : r.points)
                        csv.row(p.xi_db, to_string(d), to_string(pw), "mc", p.p_hat, p.ci_halfwidth);
                    continue;
                }
                const Scenario s{d, pw, a};
                for (double db : grid)
                    csv.row(db, to_string(d), to_string(pw), to_string(a),
                            success_prob(s, db_to_linear(db), o.r_o, ctx.model, line_options(o)), 0.0);
            }
        }
    }
    out.finish(ctx.config, o.seed);
    return Ok;
}

int cmd_throughput(const Options& o, Output& out)
{
    const Context ctx = load(o);
    const auto grid = xi_grid(o);
    CsvWriter csv(out.stream(), {"xi_dB", "scenario", "power", "p", "throughput_nats_per_hz", "throughput_bps"});
    for (PowerMode pw : power_modes(o, ctx.config, false)) {
        for (Directivity d : scenarios(o)) {
            const Scenario s{d, pw, Approximation::TwoDPpp};
            for (double db : grid) {
                const double xi = db_to_linear(db);
                const double p = success_prob(s, xi, o.r_o, ctx.model);
                const Throughput t = throughput(p, xi, ctx.config.rate_gap_zeta, ctx.config.bandwidth_hz);
                csv.row(db, to_string(d), to_string(pw), p, t.nats_per_hz, t.bits_per_s);
            }
        }
    }
    out.finish(ctx.config, o.seed);
    return Ok;
}

int cmd_delay(const Options& o, Output& out)
{
    const Context ctx = load(o);
    const TrafficShape shape = traffic_shape(ctx.config, ctx.model.devices_per_cell);
    const int m_max = o.m_max > 0 ? o.m_max : shape.arrival_cycles - 1;
    if (o.m_min < 1 || m_max < o.m_min) throw ConfigError("empty segment range");
    CsvWriter csv(out.stream(), {"scenario", "power", "m", "xi", "p", "rho", "stable", "mu_L", "mu_W_cycles",
                                 "mu_W_seconds", "optimal"});
    const PowerMode pw = ctx.config.power_mode;
    for (Directivity d : scenarios(o)) {
        const auto success = analytic_success({d, pw, Approximation::TwoDPpp}, ctx.model, o.r_o);
        std::vector<SegmentRow> rows;
        int best = 0;
        for (int m = o.m_min; m <= m_max; ++m) {
            rows.push_back(evaluate_segments(m, shape, ctx.config, success));
            const SegmentRow& r = rows.back();
            if (r.stable && (best == 0 || r.mean_delay_cycles < rows[static_cast<std::size_t>(best - o.m_min)].mean_delay_cycles))
                best = m;
        }
        for (const auto& r : rows)
            csv.row(to_string(d), to_string(pw), r.m, r.xi, r.p, r.utilization, r.stable, r.mean_queue_length,
                    r.mean_delay_cycles, r.mean_delay_seconds, r.m == best);
    }
    out.note("arrival_cycles", shape.arrival_cycles);
    out.finish(ctx.config, o.seed);
    return Ok;
}

int cmd_delay_cdf(const Options& o, Output& out)
{
    const Context ctx = load(o);
    const TrafficShape shape = traffic_shape(ctx.config, ctx.model.devices_per_cell);
    const Directivity d = scenarios(o).front();
    if (scenarios(o).size() != 1) throw ConfigError("delay-cdf needs a single --scenario");
    const auto success = analytic_success({d, ctx.config.power_mode, Approximation::TwoDPpp}, ctx.model, o.r_o);
    const int m = o.m ? *o.m : optimal_segments(shape, ctx.config, success).m_star;
    const SegmentRow row = evaluate_segments(m, shape, ctx.config, success);
    if (!row.stable)
        throw UnstableQueueError("m = " + std::to_string(m) + " gives utilization " + format_number(row.utilization));
    const QueueSolution q = solve_queue(m, row.p, shape.arrival_cycles, shape.cycle_seconds);
    const DelayPmf pmf = delay_pmf(q.model, q.stationary, 1e-9, o.max_cycles);
    CsvWriter csv(out.stream(), {"w", "pmf", "cdf"});
    double cdf = 0.0;
    for (std::size_t w = 1; w < pmf.pmf.size(); ++w) {
        cdf += pmf.pmf[w];
        csv.row(static_cast<long>(w), pmf.pmf[w], cdf);
    }
    out.note("m", m);
    out.note("truncation_residual", pmf.residual);
    out.finish(ctx.config, o.seed);
    return Ok;
}

int cmd_feasibility(const Options& o, Output& out)
{
    const Context ctx = load(o);
    if (!(o.l_step_kbits > 0.0) || o.l_min_kbits > o.l_max_kbits || o.ta_min < 1 || o.ta_max < o.ta_min)
        throw ConfigError("empty packet-size or inter-arrival range");
    std::vector<double> L, Tr;
    const int nl = static_cast<int>(std::floor((o.l_max_kbits - o.l_min_kbits) / o.l_step_kbits + 1e-9));
    for (int i = 0; i <= nl; ++i) L.push_back((o.l_min_kbits + i * o.l_step_kbits) * 1e3);
    const double cycle = ctx.model.devices_per_cell * ctx.config.slot_s;
    for (int ta = o.ta_min; ta <= o.ta_max; ++ta) Tr.push_back(ta * cycle);

    FeasibilityOptions fo;
    fo.evaluate_delay = o.with_delay;
    fo.delay_budget_s = o.delay_budget_s;
    fo.max_segments = o.max_segments;
    CsvWriter csv(out.stream(), {"scenario", "power", "L_kbits", "Tr_s", "T_a", "feasible", "m_star",
                                 "m_lowest_load", "lowest_load", "mu_W_seconds"});
    for (Directivity d : scenarios(o)) {
        const auto success = analytic_success({d, ctx.config.power_mode, Approximation::TwoDPpp}, ctx.model, o.r_o);
        const FeasibilityRegion reg = feasibility_region(L, Tr, ctx.config, ctx.model.devices_per_cell, success, fo);
        for (const auto& c : reg.cells)
            csv.row(to_string(d), to_string(ctx.config.power_mode), c.packet_bits / 1e3, c.interarrival_s,
                    c.arrival_cycles, c.feasible, c.m_star, c.m_lowest_load, c.lowest_load, c.mean_delay_s);
    }
    out.finish(ctx.config, o.seed);
    return Ok;
}

int cmd_mc(const Options& o, Output& out)
{
    const Context ctx = load(o);
    const auto grid = xi_grid(o);
    report_window(ctx, out);
    const SimPhysics phy = SimPhysics::from(ctx.config, ctx.layout);
    CsvWriter csv(out.stream(), {"xi_dB", "p_hat", "ci_halfwidth", "scenario", "seed", "trials"});
    for (PowerMode pw : power_modes(o, ctx.config, false)) {
        for (Directivity d : scenarios(o)) {
            const SimResult r = estimate_success(ctx.layout, phy, sim_config(o, d, pw, grid));
            for (const auto& p : r.points)
                csv.row(p.xi_db, p.p_hat, p.ci_halfwidth, scenario_label(d, pw), static_cast<unsigned long long>(o.seed),
                        r.trials);
        }
    }
    out.finish(ctx.config, o.seed);
    return Ok;
}

int cmd_validate(const Options& o, Output& out)
{
    const Context ctx = load(o);
    const auto grid = xi_grid(o);
    report_window(ctx, out);
    const SimPhysics phy = SimPhysics::from(ctx.config, ctx.layout);
    CsvWriter csv(out.stream(), {"xi_dB", "scenario", "analytic", "p_hat", "ci_halfwidth", "tolerance", "pass"});
    bool all_ok = true;
    for (PowerMode pw : power_modes(o, ctx.config, true)) {
        for (Directivity d : scenarios(o)) {
            const SimResult r = estimate_success(ctx.layout, phy, sim_config(o, d, pw, grid));
            const Scenario s{d, pw, Approximation::TwoDPpp};
            for (const auto& p : r.points) {
                const double a = success_prob(s, db_to_linear(p.xi_db), o.r_o, ctx.model);
                const double tol = std::max(0.02, 3.0 * p.ci_halfwidth);
                const bool ok = std::abs(a - p.p_hat) <= tol;
                all_ok = all_ok && ok;
                csv.row(p.xi_db, scenario_label(d, pw), a, p.p_hat, p.ci_halfwidth, tol, ok);
            }
        }
    }
    out.finish(ctx.config, o.seed);
    if (!all_ok) std::cerr << "validation failed: analysis and simulation disagree beyond tolerance\n";
    return all_ok ? Ok : ValidationFailure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Grid IoT data aggregation: SINR success probability, PH/PH/1 delay and rate design"};
    app.set_version_flag("--version", GRIDIOT_VERSION);
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("--scenario", o.scenario, "dgw-dn, dgw-on, ogw-on or all");
        sub->add_option("--power", o.power, "constant or inversion (overrides the config)");
        sub->add_option("--out", o.out, "CSV output path (stdout if omitted)");
        sub->add_option("--r-o", o.r_o, "link distance for constant power [m]");
    };
    auto xi_range = [&](CLI::App* sub) {
        sub->add_option("--xi-min", o.xi_min, "lowest threshold [dB]");
        sub->add_option("--xi-max", o.xi_max, "highest threshold [dB]");
        sub->add_option("--xi-step", o.xi_step, "threshold step [dB]");
    };
    auto sim = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "RNG seed");
        sub->add_option("--trials", o.trials, "Monte Carlo trials per threshold")->check(CLI::PositiveNumber);
    };

    auto* success = app.add_subcommand("success-prob", "success probability curves");
    common(success);
    xi_range(success);
    sim(success);
    success->add_option("--approx", o.approx, "1d, 2d, both, mc or all");
    success->add_option("--lines-per-side", o.lines_per_side, "sum a fixed number of lines per side (1D-PPPs)");

    auto* thr = app.add_subcommand("throughput", "throughput versus threshold");
    common(thr);
    xi_range(thr);

    auto* delay = app.add_subcommand("delay", "mean delay per segmentation m");
    common(delay);
    delay->add_option("--m-min", o.m_min, "first m");
    delay->add_option("--m-max", o.m_max, "last m (default T_a - 1)");

    auto* cdf = app.add_subcommand("delay-cdf", "delay distribution at m (default m*)");
    common(cdf);
    cdf->add_option("--m", o.m, "segments");
    cdf->add_option("--max-cycles", o.max_cycles, "truncate the PMF here");

    auto* feas = app.add_subcommand("feasibility", "(L, T_r) feasibility region");
    common(feas);
    feas->add_option("--l-min-kbits", o.l_min_kbits);
    feas->add_option("--l-max-kbits", o.l_max_kbits);
    feas->add_option("--l-step-kbits", o.l_step_kbits);
    feas->add_option("--ta-min", o.ta_min, "smallest T_a in Tx cycles");
    feas->add_option("--ta-max", o.ta_max, "largest T_a in Tx cycles");
    feas->add_option("--delay-budget-s", o.delay_budget_s, "also require mean delay <= budget");
    feas->add_option("--max-segments", o.max_segments, "largest m a device may use");
    feas->add_flag("--with-delay", o.with_delay, "solve the queues to report m* and its delay");

    auto* val = app.add_subcommand("validate", "compare 2D-PPP analysis with Monte Carlo");
    common(val);
    xi_range(val);
    sim(val);

    auto* mc = app.add_subcommand("mc", "Monte Carlo success probability");
    common(mc);
    xi_range(mc);
    sim(mc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : ConfigFailure;
    }

    const std::vector<std::string> args(argv + 1, argv + argc);
    try {
        CLI::App* sub = app.get_subcommands().front();
        Output out(o, sub->get_name(), args);
        if (sub == success) return cmd_success(o, out);
        if (sub == thr) return cmd_throughput(o, out);
        if (sub == delay) return cmd_delay(o, out);
        if (sub == cdf) return cmd_delay_cdf(o, out);
        if (sub == feas) return cmd_feasibility(o, out);
        if (sub == val) return cmd_validate(o, out);
        if (sub == mc) return cmd_mc(o, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return NumericFailure;
    }
    return Ok;
}
