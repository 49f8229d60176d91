#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridiot/errors.hpp"

namespace gridiot {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Discrete phase-type distribution (alpha, T, t) with t = (I - T) 1.
struct PhDistribution {
    RowVectorXd initial;
    MatrixXd transient;
    VectorXd absorption;

    Eigen::Index size() const { return transient.rows(); }

    /// Mean time to absorption, alpha (I - T)^-1 1.
    double mean() const
    {
        const MatrixXd I = MatrixXd::Identity(size(), size());
        const VectorXd ones = VectorXd::Ones(size());
        return initial * (I - transient).partialPivLu().solve(ones);
    }

    /// P{absorption at step i} for i = 0..steps (index 0 is always zero).
    std::vector<double> pmf(int steps) const
    {
        std::vector<double> out(static_cast<std::size_t>(steps) + 1, 0.0);
        RowVectorXd state = initial;
        for (int i = 1; i <= steps; ++i) {
            out[static_cast<std::size_t>(i)] = state * absorption;
            state = state * transient;
        }
        return out;
    }
};

/// Packet generation every `arrival_cycles` cycles: a deterministic chain that
/// walks through all phases before absorbing.
inline PhDistribution build_arrival_ph(int arrival_cycles)
{
    if (arrival_cycles < 1) throw DomainError("build_arrival_ph: T_a must be at least 1");
    const Eigen::Index n = arrival_cycles;
    PhDistribution ph;
    ph.initial = RowVectorXd::Unit(n, 0);
    ph.transient = MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) ph.transient(i, i + 1) = 1.0;
    ph.absorption = VectorXd::Unit(n, n - 1);
    return ph;
}

/// Service of m segments, each delivered in a cycle with probability p.
inline PhDistribution build_departure_ph(int segments, double p)
{
    if (segments < 1) throw DomainError("build_departure_ph: need at least one segment");
    if (!(p > 0.0 && p <= 1.0))
        throw DomainError("build_departure_ph: success probability must lie in (0, 1]");
    const Eigen::Index m = segments;
    PhDistribution ph;
    ph.initial = RowVectorXd::Unit(m, 0);
    ph.transient = (1.0 - p) * MatrixXd::Identity(m, m);
    for (Eigen::Index i = 0; i + 1 < m; ++i) ph.transient(i, i + 1) = p;
    ph.absorption = VectorXd::Zero(m);
    ph.absorption(m - 1) = p;
    return ph;
}

inline MatrixXd kron(const MatrixXd& a, const MatrixXd& b)
{
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Level-independent QBD of the PH/PH/1 queue observed once per cycle.
/// Phases within a level are ordered (arrival phase) x (service phase).
struct QbdModel {
    MatrixXd B, C, E;  ///< boundary blocks
    MatrixXd A0, A1, A2; ///< up, local and down blocks of the repeating part
    PhDistribution arrival;
    PhDistribution departure;
    int segments = 1;
    int arrival_cycles = 1;
    double p = 1.0;

    Eigen::Index level_size() const { return A1.rows(); }
};

inline QbdModel build_qbd(const PhDistribution& arrival, const PhDistribution& departure)
{
    QbdModel q;
    q.arrival = arrival;
    q.departure = departure;
    q.arrival_cycles = static_cast<int>(arrival.size());
    q.segments = static_cast<int>(departure.size());
    q.p = departure.absorption.sum();

    const MatrixXd& K = arrival.transient;
    const MatrixXd renew = arrival.absorption * arrival.initial; // k alpha
    const MatrixXd& S = departure.transient;
    const MatrixXd restart = departure.absorption * departure.initial; // s beta

    q.B = K;
    q.C = kron(renew, departure.initial);
    q.E = kron(K, departure.absorption);
    q.A0 = kron(renew, S);
    q.A1 = kron(renew, restart) + kron(K, S);
    q.A2 = kron(K, restart);
    return q;
}

inline QbdModel build_qbd(int segments, double p, int arrival_cycles)
{
    return build_qbd(build_arrival_ph(arrival_cycles), build_departure_ph(segments, p));
}

/// m / (p T_a): mean service time over the inter-arrival time.
inline double utilization(int segments, double p, int arrival_cycles)
{
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    return segments / (p * arrival_cycles);
}

inline double residual_norm(const MatrixXd& R, const MatrixXd& A0, const MatrixXd& A1, const MatrixXd& A2)
{
    return (R - A0 - R * A1 - R * R * A2).cwiseAbs().rowwise().sum().maxCoeff();
}

inline double spectral_radius(const MatrixXd& M)
{
    if (M.size() == 0) return 0.0;
    return Eigen::EigenSolver<MatrixXd>(M, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// Minimal non-negative solution of R = A0 + R A1 + R^2 A2 by cyclic
/// reduction on the dual equation for G, then R = A0 (I - A1 - A0 G)^-1.
inline MatrixXd solve_rate_matrix(const MatrixXd& A0, const MatrixXd& A1, const MatrixXd& A2,
                                  int max_iterations = 200)
{
    const Eigen::Index n = A1.rows();
    if (A0.isZero(0.0)) return MatrixXd::Zero(n, n);
    const MatrixXd I = MatrixXd::Identity(n, n);

    MatrixXd down = A2, local = A1, up = A0, hat = A1;
    bool converged = false;
    for (int it = 0; it < max_iterations; ++it) {
        const Eigen::PartialPivLU<MatrixXd> lu(I - local);
        const MatrixXd kd = lu.solve(down);
        const MatrixXd ku = lu.solve(up);
        const MatrixXd down_next = down * kd;
        const MatrixXd up_next = up * ku;
        local += down * ku + up * kd;
        hat += up * kd;
        down = down_next;
        up = up_next;
        if (down.cwiseAbs().rowwise().sum().maxCoeff() < 1e-15
            || up.cwiseAbs().rowwise().sum().maxCoeff() < 1e-15) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NumericError("cyclic reduction did not converge");
    const MatrixXd G = (I - hat).partialPivLu().solve(A2);
    const MatrixXd R = A0 * (I - A1 - A0 * G).inverse();
    const double res = residual_norm(R, A0, A1, A2);
    if (!(res < 1e-10))
        throw NumericError("rate matrix residual " + std::to_string(res) + " after cyclic reduction");
    return R;
}

/// Reference solver: R <- A0 + R A1 + R^2 A2 from R = 0.
inline MatrixXd solve_rate_matrix_iterative(const MatrixXd& A0, const MatrixXd& A1, const MatrixXd& A2,
                                            double tolerance = 1e-15, long max_iterations = 5'000'000)
{
    const Eigen::Index n = A1.rows();
    MatrixXd R = MatrixXd::Zero(n, n);
    for (long it = 0; it < max_iterations; ++it) {
        MatrixXd next = A0 + R * A1 + R * R * A2;
        const double step = (next - R).cwiseAbs().maxCoeff();
        R = std::move(next);
        if (step < tolerance) return R;
    }
    throw NumericError("value iteration for the rate matrix did not converge");
}

struct StationarySolution {
    MatrixXd R;
    RowVectorXd pi0; ///< empty level, one entry per arrival phase
    RowVectorXd pi1; ///< level one
    double utilization = 0.0;

    /// pi_q = pi_1 R^(q-1) for q >= 1.
    RowVectorXd level(int q) const
    {
        if (q < 1) throw DomainError("level: use pi0 for the empty level");
        RowVectorXd v = pi1;
        for (int i = 1; i < q; ++i) v = v * R;
        return v;
    }

    double total_mass() const
    {
        const Eigen::Index n = R.rows();
        const MatrixXd I = MatrixXd::Identity(n, n);
        return pi0.sum() + pi1 * (I - R).partialPivLu().solve(VectorXd::Ones(n));
    }
};

/// (I - B)^-1 for strictly upper-triangular B, by back substitution.
inline MatrixXd boundary_inverse(const MatrixXd& B)
{
    const Eigen::Index n = B.rows();
    const MatrixXd I = MatrixXd::Identity(n, n);
    if (!B.triangularView<Eigen::Lower>().toDenseMatrix().isZero(0.0))
        return (I - B).partialPivLu().inverse();
    const MatrixXd IB = I - B;
    return IB.triangularView<Eigen::UnitUpper>().solve(I);
}

inline StationarySolution steady_state(const QbdModel& q, const MatrixXd& R)
{
    const Eigen::Index n = q.level_size();
    const MatrixXd I = MatrixXd::Identity(n, n);
    const MatrixXd back = q.E * boundary_inverse(q.B); // level 1 -> level 0 -> level 1
    const MatrixXd level_one = back * q.C + q.A1 + R * q.A2;
    const MatrixXd Q = level_one.transpose() - I;

    Eigen::JacobiSVD<MatrixXd> svd(Q, Eigen::ComputeFullV);
    const VectorXd sv = svd.singularValues();
    if (n > 1 && !(sv(n - 2) > 1e-10 * std::max(1.0, sv(0))))
        throw NumericError("stationary vector is not unique (null space dimension > 1)");
    if (!(sv(n - 1) < 1e-8))
        throw NumericError("level-one chain has no stationary vector (smallest singular value "
                           + std::to_string(sv(n - 1)) + ")");

    VectorXd v = svd.matrixV().col(n - 1);
    if (v.sum() < 0.0) v = -v;
    if (v.minCoeff() < -1e-9 * v.cwiseAbs().maxCoeff())
        throw NumericError("stationary vector has entries of mixed sign");
    for (Eigen::Index i = 0; i < n; ++i)
        if (v(i) < 1e-14 * v.cwiseAbs().maxCoeff()) v(i) = 0.0;

    StationarySolution out;
    out.R = R;
    out.pi1 = v.transpose();
    out.pi0 = out.pi1 * back;
    const double mass = out.pi0.sum() + out.pi1 * (I - R).partialPivLu().solve(VectorXd::Ones(n));
    out.pi0 /= mass;
    out.pi1 /= mass;
    out.utilization = utilization(q.segments, q.p, q.arrival_cycles);
    return out;
}

struct DelayResult {
    double mean_queue_length = 0.0; ///< packets, time-averaged over cycles
    double mean_delay_cycles = 0.0;
    double mean_delay_seconds = 0.0;
};

/// Mean queue length pi_1 (I - R)^-2 1 and, by Little's law, mean delay.
inline DelayResult delay_metrics(const StationarySolution& sol, int arrival_cycles, double cycle_seconds = 0.0)
{
    const Eigen::Index n = sol.R.rows();
    const MatrixXd I = MatrixXd::Identity(n, n);
    const Eigen::PartialPivLU<MatrixXd> lu(I - sol.R);
    const VectorXd once = lu.solve(VectorXd::Ones(n));
    DelayResult d;
    d.mean_queue_length = sol.pi1 * lu.solve(once);
    d.mean_delay_cycles = arrival_cycles * d.mean_queue_length;
    d.mean_delay_seconds = d.mean_delay_cycles * cycle_seconds;
    return d;
}

struct DelayPmf {
    std::vector<double> pmf; ///< pmf[w] = P{delay = w cycles}, pmf[0] = 0
    double residual = 0.0;   ///< probability mass beyond the last entry

    double cdf(int w) const
    {
        if (w < 0) return 0.0;
        const auto end = pmf.begin() + std::min<std::ptrdiff_t>(w + 1, static_cast<std::ptrdiff_t>(pmf.size()));
        return std::accumulate(pmf.begin(), end, 0.0);
    }

    /// P{delay < w}: the delay counted with the generation cycle included.
    double cdf_below(int w) const { return cdf(w - 1); }

    double mean() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < pmf.size(); ++i) s += static_cast<double>(i) * pmf[i];
        return s;
    }
};

/// Packets in system seen by an arrival, split by the head-of-line service
/// phase. Entry z-1 holds the case of z packets including the arrival.
inline std::vector<RowVectorXd> arrival_view(const QbdModel& q, const StationarySolution& sol,
                                             double tail_mass = 1e-14, int max_levels = 1'000'000)
{
    const Eigen::Index m = q.segments;
    const Eigen::Index last = static_cast<Eigen::Index>(q.arrival_cycles - 1) * m;
    const double Ta = q.arrival_cycles;
    const RowVectorXd& beta = q.departure.initial;
    const MatrixXd& S = q.departure.transient;
    const VectorXd& s = q.departure.absorption;

    std::vector<RowVectorXd> y;
    RowVectorXd below = sol.pi1;   // level z-1 (starts at level 1)
    RowVectorXd current = sol.pi1; // level z
    y.push_back(Ta * (sol.pi0(q.arrival_cycles - 1) * beta + current.segment(last, m).dot(s) * beta));
    double seen = y.back().sum();
    for (int z = 2; z <= max_levels && 1.0 - seen > tail_mass; ++z) {
        current = current * sol.R;
        y.push_back(Ta * (below.segment(last, m) * S + current.segment(last, m).dot(s) * beta));
        seen += y.back().sum();
        below = current;
        if (y.back().sum() < 1e-17) break;
    }
    return y;
}

/// Distribution of the packet delay (queueing plus service, in cycles).
///
/// With z packets ahead of and including the arrival and the head of line in
/// phase j, the delay is the time for the service chain to complete z times.
/// v[z][i] holds, per phase, the probability that the z-th completion occurs
/// at step i; v[z][i] = S v[z][i-1] + s (beta v[z-1][i-1]).
inline DelayPmf delay_pmf(const QbdModel& q, const StationarySolution& sol, double tail = 1e-9,
                          int max_cycles = 10'000)
{
    const std::vector<RowVectorXd> y = arrival_view(q, sol);
    const MatrixXd& S = q.departure.transient;
    const VectorXd& s = q.departure.absorption;
    const RowVectorXd& beta = q.departure.initial;
    const std::size_t Z = y.size();

    std::vector<VectorXd> v(Z, VectorXd::Zero(q.segments));
    DelayPmf out;
    out.pmf.push_back(0.0);
    double total = 0.0;
    for (int i = 1; i <= max_cycles; ++i) {
        // Update from the highest z down so v[z-1] still holds step i-1.
        for (std::size_t z = Z; z-- > 1;) v[z] = S * v[z] + s * (beta * v[z - 1]);
        v[0] = (i == 1) ? VectorXd(s) : VectorXd(S * v[0]);
        double mass = 0.0;
        for (std::size_t z = 0; z < Z; ++z) mass += y[z] * v[z];
        out.pmf.push_back(mass);
        total += mass;
        if (1.0 - total < tail) break;
    }
    out.residual = std::max(0.0, 1.0 - total);
    return out;
}

/// Complete analytical solution for one (m, p, T_a) point.
struct QueueSolution {
    QbdModel model;
    StationarySolution stationary;
    DelayResult delay;
};

inline QueueSolution solve_queue(int segments, double p, int arrival_cycles, double cycle_seconds = 0.0)
{
    const double rho = utilization(segments, p, arrival_cycles);
    if (!(rho < 1.0))
        throw UnstableQueueError("queue is unstable: utilization " + std::to_string(rho) + " >= 1");
    QueueSolution out;
    out.model = build_qbd(segments, p, arrival_cycles);
    const MatrixXd R = solve_rate_matrix(out.model.A0, out.model.A1, out.model.A2);
    out.stationary = steady_state(out.model, R);
    out.delay = delay_metrics(out.stationary, arrival_cycles, cycle_seconds);
    return out;
}

/// Cycle-by-cycle simulation of the device queue. A packet is generated every
/// `arrival_cycles` cycles; in each cycle the head-of-line packet (if it was
/// queued before this cycle) sends one segment, which gets through with
/// probability p. Returns the delay of each of `packets` packets in cycles.
inline std::vector<int> queue_des_oracle(int segments, double p, int arrival_cycles, long packets,
                                         std::uint64_t seed)
{
    if (segments < 1 || arrival_cycles < 1 || !(p > 0.0 && p <= 1.0))
        throw DomainError("queue_des_oracle: invalid parameters");
    if (packets < 100) throw DomainError("queue_des_oracle: horizon too short, need at least 100 packets");

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution delivered(p);
    std::deque<long> queue; // arrival cycles
    int remaining = segments;
    std::vector<int> delays;
    delays.reserve(static_cast<std::size_t>(packets));
    long generated = 0;
    for (long cycle = 0; static_cast<long>(delays.size()) < packets; ++cycle) {
        if (!queue.empty() && delivered(rng) && --remaining == 0) {
            delays.push_back(static_cast<int>(cycle - queue.front()));
            queue.pop_front();
            remaining = segments;
        }
        if (cycle % arrival_cycles == 0 && generated < packets) {
            queue.push_back(cycle);
            ++generated;
        }
    }
    return delays;
}

/// True when the delays keep growing: the last quarter averages more than
/// 1.5 times the second quarter (the first quarter is warm-up).
inline bool looks_divergent(std::span<const int> delays)
{
    const std::size_t n = delays.size();
    if (n < 8) throw DomainError("looks_divergent: need at least 8 samples");
    auto mean = [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += delays[i];
        return s / static_cast<double>(e - b);
    };
    const std::size_t q = n / 4;
    return mean(3 * q, n) > 1.5 * mean(q, 2 * q);
}

/// Largest gap between the analytical and empirical delay CDFs.
inline double ks_distance(const DelayPmf& pmf, std::span<const int> delays)
{
    if (delays.empty()) throw DomainError("ks_distance: no samples");
    const int wmax = std::max(static_cast<int>(pmf.pmf.size()), *std::max_element(delays.begin(), delays.end()) + 1);
    std::vector<double> counts(static_cast<std::size_t>(wmax) + 1, 0.0);
    for (int d : delays) counts[static_cast<std::size_t>(std::max(0, d))] += 1.0;
    double emp = 0.0, ana = 0.0, worst = 0.0;
    for (int w = 0; w <= wmax; ++w) {
        emp += counts[static_cast<std::size_t>(w)] / static_cast<double>(delays.size());
        if (w < static_cast<int>(pmf.pmf.size())) ana += pmf.pmf[static_cast<std::size_t>(w)];
        worst = std::max(worst, std::abs(emp - ana));
    }
    return worst;
}

} // namespace gridiot
