#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "gridiot/quadrature.hpp"
#include "gridiot/ratedesign.hpp"
#include "gridiot/sinr_analysis.hpp"
#include "gridiot/special.hpp"

using namespace gridiot;

namespace {

const AnalyticModel& reference()
{
    static const AnalyticModel m = AnalyticModel::from(NetworkConfig{});
    return m;
}

constexpr Directivity all_dirs[] = {Directivity::DgwDn, Directivity::DgwOn, Directivity::OgwOn};

std::vector<double> db_grid(double lo, double hi, double step)
{
    std::vector<double> out;
    for (double d = lo; d <= hi + 1e-9; d += step) out.push_back(d);
    return out;
}

} // namespace

TEST(Hypergeometric, ArctanIdentityAtEtaFour)
{
    for (double x : {1e-8, 1e-3, 0.1, 0.49, 0.5, 0.51, 1.0, 2.0, 3.99, 4.0, 4.01, 10.0, 123.0, 1e4, 1e8}) {
        const double ref = std::atan(std::sqrt(x)) / std::sqrt(x);
        EXPECT_NEAR(hyp2f1_eta(x, 4.0), ref, 1e-10 * std::max(1.0, ref)) << "x=" << x;
    }
    EXPECT_DOUBLE_EQ(hyp2f1_eta(0.0, 4.0), 1.0);
}

TEST(Hypergeometric, IntegralRepresentation)
{
    for (double eta : {2.5, 3.0, 3.7, 5.0, 6.0}) {
        const double a = 1.0 - 2.0 / eta;
        for (double x : {0.2, 0.7, 3.0, 25.0, 900.0}) {
            // u = t^a turns a t^(a-1) dt / (1 + x t) into du / (1 + x u^(1/a)).
            const double ref = quad::integrate([&](double u) { return 1.0 / (1.0 + x * std::pow(u, 1.0 / a)); },
                                               0.0, 1.0, {1e-13, 1e-14, 8000});
            EXPECT_NEAR(hyp2f1_eta(x, eta), ref, 1e-10) << "eta=" << eta << " x=" << x;
        }
    }
    EXPECT_THROW(hyp2f1_eta(1.0, 2.0), DomainError);
    EXPECT_THROW(hyp2f1_eta(-1.0, 4.0), DomainError);
}

TEST(Kernel, MatchesRadialQuadrature)
{
    for (double eta : {3.0, 4.0, 4.5}) {
        for (double c : {1.0, 50.0, 424.35}) {
            for (double k : {0.3, 1e3, 8.1e9}) {
                boost::math::quadrature::exp_sinh<double> rule;
                auto shifted = [&](double x) {
                    const double v = c + x;
                    return v / (1.0 + std::pow(v, eta) / k);
                };
                const double ref = rule.integrate(shifted, 1e-14);
                const double got = detail::ppp_kernel(c, k, eta);
                EXPECT_NEAR(got, ref, 1e-8 * ref) << "eta=" << eta << " c=" << c << " k=" << k;
            }
        }
    }
}

// The closed forms against numerical integration of the interference
// Laplace transform they come from.
TEST(ClosedForm, OmniConstantPowerMatchesLaplaceQuadrature)
{
    const AnalyticModel& m = reference();
    const double r_o = 300.0;
    for (double db : {-10.0, -3.0, 0.0, 4.0, 10.0}) {
        const double xi = db_to_linear(db);
        const double k = xi * std::pow(r_o, m.eta);
        const double a = m.guard_radius();
        const double radial = quad::integrate_semi_infinite(
            [&](double r) { return r * (1.0 - 1.0 / (1.0 + k * std::pow(r, -m.eta))); }, a, a);
        const double ref = std::exp(-k * m.noise_w / m.constant_power_w
                                    - 2.0 * std::numbers::pi * m.active_density() * radial);
        EXPECT_NEAR(success_prob_2d(Directivity::OgwOn, xi, r_o, m), ref, 1e-8) << db;
    }
}

TEST(ClosedForm, OmniPowerControlMatchesLaplaceQuadrature)
{
    const AnalyticModel& m = reference();
    for (double db : {-10.0, -3.0, 0.0, 4.0, 10.0}) {
        const double xi = db_to_linear(db);
        const double radial = quad::integrate_semi_infinite(
            [&](double v) { return v * (1.0 - 1.0 / (1.0 + xi * std::pow(v, -m.eta))); }, 1.0, 1.0);
        const double ref = std::exp(-xi * m.noise_w / m.rho_w
                                    - 2.0 * std::numbers::pi * m.active_density() * m.mean_sq_distance * radial);
        EXPECT_NEAR(success_prob_2d_pc(Directivity::OgwOn, xi, m), ref, 1e-8) << db;
    }
}

TEST(ClosedForm, DirectionalGatewayMatchesDoubleIntegral)
{
    const AnalyticModel& m = reference();
    const double r_o = 300.0, a = m.guard_radius();
    for (double db : {-5.0, 0.0, 6.0}) {
        const double xi = db_to_linear(db);
        const double k = xi * std::pow(r_o, m.eta) / m.pattern.peak();
        auto radial = [&](double theta) {
            const double kg = k * m.pattern(theta);
            if (kg <= 0.0) return 0.0;
            return quad::integrate_semi_infinite(
                [&](double r) { return r / (1.0 + std::pow(r, m.eta) / kg); }, a, a);
        };
        const double angular = quad::integrate(radial, 0.0, 2.0 * std::numbers::pi, {1e-11, 1e-12, 4000});
        const double ref = std::exp(-k * m.noise_w / m.constant_power_w - m.active_density() * angular);
        EXPECT_NEAR(success_prob_2d(Directivity::DgwOn, xi, r_o, m), ref, 1e-8) << db;
    }
}

TEST(Reduction, IsotropicPatternCollapsesScenarios)
{
    AnalyticModel iso = reference();
    iso.pattern.b = 0.0;
    AnalyticModel nearly = reference();
    nearly.pattern.b = 1e-7;
    for (double db : {-6.0, 0.0, 8.0}) {
        const double xi = db_to_linear(db);
        const double omni = success_prob_2d(Directivity::OgwOn, xi, 300.0, iso);
        const double omni_pc = success_prob_2d_pc(Directivity::OgwOn, xi, iso);
        for (Directivity d : {Directivity::DgwDn, Directivity::DgwOn}) {
            EXPECT_NEAR(success_prob_2d(d, xi, 300.0, iso), omni, 1e-12);
            EXPECT_NEAR(success_prob_2d_pc(d, xi, iso), omni_pc, 1e-12);
            // The integral path with a vanishing beam reaches the same value.
            EXPECT_NEAR(success_prob_2d(d, xi, 300.0, nearly), omni, 1e-6);
            EXPECT_NEAR(success_prob_2d_pc(d, xi, nearly), omni_pc, 1e-6);
        }
    }
}

TEST(Monotonicity, DecreasingInThreshold)
{
    const AnalyticModel& m = reference();
    for (PowerMode pw : {PowerMode::Constant, PowerMode::Inversion}) {
        for (Directivity d : all_dirs) {
            double last = 1.0 + 1e-12;
            for (double db : db_grid(-10.0, 10.0, 1.0)) {
                const double p = success_prob({d, pw, Approximation::TwoDPpp}, db_to_linear(db), 300.0, m);
                EXPECT_GE(p, 0.0);
                EXPECT_LT(p, last) << to_string(d) << " " << to_string(pw) << " " << db;
                last = p;
            }
        }
    }
}

TEST(Monotonicity, DecreasingInLinkDistance)
{
    const AnalyticModel& m = reference();
    for (Directivity d : all_dirs) {
        double last = 1.0;
        for (double r : {120.0, 200.0, 300.0, 400.0, 480.0}) {
            const double p = success_prob_2d(d, 1.0, r, m);
            EXPECT_LT(p, last);
            last = p;
        }
    }
}

TEST(Monotonicity, DecreasingInNoise)
{
    for (Directivity d : all_dirs) {
        double last_c = 1.0, last_pc = 1.0;
        for (double dbm : {-130.0, -115.0, -110.0, -100.0}) {
            AnalyticModel m = reference();
            m.noise_w = dbm_to_watts(dbm);
            const double pc = success_prob_2d_pc(d, 1.0, m), c = success_prob_2d(d, 1.0, 300.0, m);
            EXPECT_LT(pc, last_pc);
            EXPECT_LT(c, last_c);
            last_pc = pc;
            last_c = c;
        }
    }
}

TEST(Monotonicity, DecreasingInDensity)
{
    for (Directivity d : all_dirs) {
        double last_c = 0.0, last_pc = 0.0;
        for (int n : {60, 90, 120, 180, 240}) { // sparser active interferers as N_G grows
            AnalyticModel m = reference();
            m.devices_per_cell = n;
            const double pc = success_prob_2d_pc(d, 1.0, m), c = success_prob_2d(d, 1.0, 300.0, m);
            EXPECT_GT(pc, last_pc);
            EXPECT_GT(c, last_c);
            last_pc = pc;
            last_c = c;
        }
    }
}

TEST(Ordering, DirectivityHelps)
{
    const AnalyticModel& m = reference();
    for (double db : db_grid(-10.0, 10.0, 2.0)) {
        const double xi = db_to_linear(db);
        EXPECT_GE(success_prob_2d(Directivity::DgwDn, xi, 300.0, m), success_prob_2d(Directivity::DgwOn, xi, 300.0, m));
        EXPECT_GE(success_prob_2d(Directivity::DgwOn, xi, 300.0, m), success_prob_2d(Directivity::OgwOn, xi, 300.0, m));
        EXPECT_GE(success_prob_2d_pc(Directivity::DgwDn, xi, m), success_prob_2d_pc(Directivity::DgwOn, xi, m));
        EXPECT_GE(success_prob_2d_pc(Directivity::DgwOn, xi, m), success_prob_2d_pc(Directivity::OgwOn, xi, m));
    }
}

TEST(LineSum, AgreesWithPlanarApproximation)
{
    const AnalyticModel& m = reference();
    for (Directivity d : all_dirs) {
        const double step = d == Directivity::DgwDn ? 5.0 : 1.0;
        for (double db : db_grid(-10.0, 10.0, step)) {
            const double xi = db_to_linear(db);
            EXPECT_NEAR(success_prob_1d(d, xi, 300.0, m), success_prob_2d(d, xi, 300.0, m), 0.02)
                << to_string(d) << " " << db;
        }
    }
}

TEST(LineSum, FiniteWindowConverges)
{
    const AnalyticModel& m = reference();
    const double full = success_prob_1d(Directivity::OgwOn, 1.0, 300.0, m);
    LineSumOptions few;
    few.lines_per_side = 15;
    const double windowed = success_prob_1d(Directivity::OgwOn, 1.0, 300.0, m, few);
    EXPECT_GT(windowed, full);
    EXPECT_LT(windowed - full, 5e-3);
    few.lines_per_side = 400;
    EXPECT_NEAR(success_prob_1d(Directivity::OgwOn, 1.0, 300.0, m, few), full, 1e-6);
}

TEST(Dispatch, UnsupportedCombinations)
{
    const AnalyticModel& m = reference();
    EXPECT_THROW(success_prob({Directivity::OgwOn, PowerMode::Inversion, Approximation::OneDPpp}, 1.0, 300.0, m),
                 DomainError);
    EXPECT_THROW(success_prob({Directivity::OgwOn, PowerMode::Constant, Approximation::MonteCarlo}, 1.0, 300.0, m),
                 DomainError);
    EXPECT_THROW(success_prob_2d(Directivity::OgwOn, -1.0, 300.0, m), DomainError);
}

TEST(Threshold, RateAndSinr)
{
    const SinrThreshold t = sinr_threshold(80e3, 3, 0.8, 1e6, 0.01);
    EXPECT_NEAR(t.xi, std::exp2(80e3 / (3 * 0.8 * 1e6 * 0.01)) - 1.0, 1e-12);
    EXPECT_NEAR(t.rate_bps, 80e3 / (3 * 0.01), 1e-9);
    EXPECT_GT(sinr_threshold(1.0, 50, 0.8, 1e6, 0.01).xi, 0.0);
    EXPECT_THROW(sinr_threshold(80e3, 0, 0.8, 1e6, 0.01), DomainError);
    EXPECT_THROW(sinr_threshold(80e3, 1, 1.2, 1e6, 0.01), DomainError);
}

TEST(Throughput, UnimodalInThreshold)
{
    const AnalyticModel& m = reference();
    for (PowerMode pw : {PowerMode::Constant, PowerMode::Inversion}) {
        for (Directivity d : all_dirs) {
            std::vector<double> t;
            for (double db : db_grid(-10.0, 25.0, 0.5)) {
                const double xi = db_to_linear(db);
                t.push_back(throughput(success_prob({d, pw, Approximation::TwoDPpp}, xi, 300.0, m), xi, 0.8, 1e6)
                                .nats_per_hz);
            }
            int changes = 0;
            for (std::size_t i = 2; i < t.size(); ++i)
                if ((t[i] - t[i - 1] > 0) != (t[i - 1] - t[i - 2] > 0)) ++changes;
            EXPECT_EQ(changes, 1) << to_string(d) << " " << to_string(pw);
        }
    }
    const double xi8 = db_to_linear(8.0), xi2 = db_to_linear(2.0);
    EXPECT_NEAR(throughput(success_prob_2d_pc(Directivity::DgwDn, xi8, m), xi8, 0.8, 1e6).nats_per_hz, 1.3039, 1e-3);
    EXPECT_NEAR(throughput(success_prob_2d_pc(Directivity::OgwOn, xi2, m), xi2, 0.8, 1e6).nats_per_hz, 0.46401, 1e-4);
    const Throughput one = throughput(0.5, 3.0, 0.8, 1e6);
    EXPECT_NEAR(one.bits_per_s, 0.5 * 0.8 * 1e6 * 2.0, 1e-6);
    EXPECT_NEAR(one.nats_per_hz, 0.5 * std::log(4.0), 1e-15);
}
