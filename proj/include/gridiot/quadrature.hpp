#pragma once

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gridiot/errors.hpp"

namespace gridiot::quad {

struct Tolerance {
    double absolute = 1e-9;
    double relative = 1e-10;
    int max_intervals = 4000;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]: the interval with the
/// largest error estimate is bisected until the summed error drops below
/// max(absolute, relative * |value|). Throws NumericError on exhaustion.
template <class F>
Estimate integrate_estimate(F&& f, double a, double b, const Tolerance& tol = {})
{
    using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    struct Piece {
        double a, b, value, error;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    auto eval = [&](double lo, double hi) {
        double err = 0.0;
        const double v = rule::integrate(f, lo, hi, 0, 0.0, &err);
        // Boost reports |K - G| on the reference interval [-1, 1].
        return Piece{lo, hi, v, err * 0.5 * (hi - lo)};
    };

    if (a == b) return {};
    std::priority_queue<Piece> pieces;
    Piece first = eval(a, b);
    double total = first.value;
    double total_err = first.error;
    pieces.push(first);
    int count = 1;
    while (total_err > std::max(tol.absolute, tol.relative * std::abs(total))) {
        if (count >= tol.max_intervals) {
            const Piece worst = pieces.top();
            std::ostringstream msg;
            msg.precision(17);
            msg << "quadrature did not converge on [" << a << ", " << b << "] after " << count
                << " intervals: value " << total << ", error estimate " << total_err
                << ", worst sub-interval [" << worst.a << ", " << worst.b << "] error "
                << worst.error;
            throw NumericError(msg.str());
        }
        const Piece worst = pieces.top();
        pieces.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval cannot be split further in double precision.
            total_err -= worst.error;
            pieces.push(Piece{worst.a, worst.b, worst.value, 0.0});
            if (pieces.top().error == 0.0) break;
            continue;
        }
        const Piece left = eval(worst.a, mid);
        const Piece right = eval(mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        pieces.push(left);
        pieces.push(right);
        ++count;
    }
    if (!std::isfinite(total)) throw NumericError("quadrature produced a non-finite value");
    return {total, total_err, count};
}

template <class F>
double integrate(F&& f, double a, double b, const Tolerance& tol = {})
{
    return integrate_estimate(std::forward<F>(f), a, b, tol).value;
}

/// Integral of f over [a, inf) with a > 0, mapped to [0, 1) by r = a / (1 - t).
template <class F>
double integrate_to_infinity(F&& f, double a, const Tolerance& tol = {})
{
    if (!(a > 0.0)) throw DomainError("integrate_to_infinity needs a positive lower limit");
    auto mapped = [&](double t) {
        const double u = 1.0 - t;
        if (u <= 0.0) return 0.0;
        const double r = a / u;
        return f(r) * a / (u * u);
    };
    return integrate(mapped, 0.0, 1.0, tol);
}

/// Integral of f over [a, inf) for any finite a, mapped by r = a + scale t / (1 - t).
template <class F>
double integrate_semi_infinite(F&& f, double a, double scale, const Tolerance& tol = {})
{
    if (!(scale > 0.0)) throw DomainError("integrate_semi_infinite needs a positive scale");
    auto mapped = [&](double t) {
        const double u = 1.0 - t;
        if (u <= 0.0) return 0.0;
        return f(a + scale * t / u) * scale / (u * u);
    };
    return integrate(mapped, 0.0, 1.0, tol);
}

} // namespace gridiot::quad
