#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "gridiot/errors.hpp"

namespace gridiot {

/// 2F1(1, 1 - 2/eta; 2 - 2/eta; -x) for x >= 0 and eta > 2.
///
/// With a = 1 - 2/eta this equals a * integral_0^1 t^(a-1) / (1 + x t) dt and
/// lies in (0, 1]. Three convergent expansions cover the half line:
///   x <= 1/2      power series in -x
///   1/2 < x <= 4  Pfaff transform, series in x / (1 + x)
///   x > 4         reflection at infinity, series in 1 / x
inline double hyp2f1_eta(double x, double eta)
{
    if (!(eta > 2.0)) throw DomainError("hyp2f1_eta: path-loss exponent must exceed 2");
    if (!(x >= 0.0)) throw DomainError("hyp2f1_eta: argument must be non-negative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;

    constexpr double eps = std::numeric_limits<double>::epsilon() * 0.25;
    constexpr int max_terms = 5000;
    const double a = 1.0 - 2.0 / eta;

    if (x <= 0.5) {
        double sum = 1.0;
        double power = 1.0;
        for (int k = 1; k < max_terms; ++k) {
            power *= -x;
            const double term = power * a / (k + a);
            sum += term;
            if (std::abs(term) < eps * std::abs(sum)) break;
        }
        return sum;
    }

    if (x <= 4.0) {
        // (1 + x)^-a * 2F1(a, a; a + 1; w),  w = x / (1 + x)
        const double w = x / (1.0 + x);
        double pochhammer_ratio = 1.0; // (a)_k / k!
        double power = 1.0;
        double sum = 1.0;
        for (int k = 0; k < max_terms; ++k) {
            pochhammer_ratio *= (a + k) / (k + 1.0);
            power *= w;
            const double term = pochhammer_ratio * power * a / (a + k + 1.0);
            sum += term;
            if (term < eps * sum) break;
        }
        return std::pow(1.0 + x, -a) * sum;
    }

    // a * [ pi x^-a / sin(pi a) - sum_k (-1)^k x^-(k+1) / (k + 1 - a) ]
    const double inv = 1.0 / x;
    double power = inv;
    double tail = 0.0;
    for (int k = 0; k < max_terms; ++k) {
        const double term = power / (k + 1.0 - a);
        tail += (k % 2 == 0) ? term : -term;
        if (term < eps * std::abs(tail)) break;
        power *= inv;
    }
    return a * (std::numbers::pi * std::pow(x, -a) / std::sin(std::numbers::pi * a) - tail);
}

} // namespace gridiot
