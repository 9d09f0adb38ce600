#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qprep/schedule.hpp"

namespace qprep {

namespace detail {

inline void check_weight(double c_sq) {
    if (!(c_sq > 0.0 && c_sq < 1.0)) throw std::invalid_argument("target weight must lie in (0, 1)");
}

inline void check_period(int period) {
    if (period < 1) throw std::invalid_argument("schedule period must be >= 1");
}

/// 1 - pi^2 delta^2 / (3 gap^2), the per-period floor on the target weight's
/// decay when the energy estimate is off by delta.
inline double period_survival(double delta, double gap) {
    if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
    if (!(delta >= 0.0 && delta < gap)) throw std::invalid_argument("need 0 <= delta < gap");
    const double z = 1.0 - std::numbers::pi * std::numbers::pi * delta * delta / (3.0 * gap * gap);
    if (!(z > 0.0))
        throw std::invalid_argument("energy estimate too coarse: survival factor is not positive");
    return z;
}

}  // namespace detail

/// Numerical maximum of prod_l cos^2(E t_l) over E in [gap, e_max]: a coarse
/// grid scan refined by golden-section search around the best grid point.
inline double gamma_numeric(const Schedule& sched, long grid_points = 100000, double tol = 1e-9) {
    if (grid_points < 3) throw std::invalid_argument("gamma_numeric: need at least 3 grid points");
    const auto value = [&sched](double e) {
        double prod = 1.0;
        for (double t : sched.times) {
            const double c = std::cos(e * t);
            prod *= c * c;
        }
        return prod;
    };

    const double lo = sched.gap, hi = sched.e_max;
    double best_e = lo, best_v = value(lo);
    for (long i = 1; i < grid_points; ++i) {
        const double e = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        const double v = value(e);
        if (v > best_v) {
            best_v = v;
            best_e = e;
        }
    }

    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    double a = std::max(lo, best_e - step);
    double b = std::min(hi, best_e + step);
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = value(x1), f2 = value(x2);
    while (b - a > tol) {
        if (f1 < f2) {  // keep the right bracket (maximising)
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = value(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = value(x1);
        }
    }
    return std::max(best_v, std::max(f1, f2));
}

/// Upper bound (1 - c_sq) * gamma^floor(k/N) on the total weight remaining in
/// non-target levels after k iterations.
inline double xi_sq_bound(long k, double c_sq, int period, double gamma) {
    detail::check_weight(c_sq);
    detail::check_period(period);
    if (k < 0) throw std::invalid_argument("iteration count must be >= 0");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
    const long q = k / period;
    return (1.0 - c_sq) * std::pow(gamma, static_cast<double>(q));
}

/// Lower bound zeta_k^2 >= (1 - pi^2 delta^2 / (3 gap^2))^ceil(k/N) on the
/// squared decay of the target amplitude itself.
inline double zeta_sq_floor(long k, double delta, double gap, int period) {
    detail::check_period(period);
    if (k < 0) throw std::invalid_argument("iteration count must be >= 0");
    const double z = detail::period_survival(delta, gap);
    const long q_ceil = (k + period - 1) / period;
    return std::pow(z, static_cast<double>(q_ceil));
}

/// Fidelity floor after k iterations when the target energy estimate is off
/// by delta (delta = 0 recovers the exact-energy floor). Evaluated in
/// log2 space so very deep runs underflow to a floor of exactly 1.
inline double fidelity_floor_approx(long k, double c_sq, int period, double delta, double gap) {
    detail::check_weight(c_sq);
    detail::check_period(period);
    if (k < 0) throw std::invalid_argument("iteration count must be >= 0");
    const double z = detail::period_survival(delta, gap);
    const long q = k / period;
    const long q_ceil = (k + period - 1) / period;
    const double log2_ratio = std::log2((1.0 - c_sq) / c_sq) - 2.0 * static_cast<double>(q) -
                              static_cast<double>(q_ceil) * std::log2(z);
    const double ratio = std::exp2(log2_ratio);  // underflows to 0 for huge k
    return 1.0 / (1.0 + ratio);
}

inline double fidelity_floor_exact(long k, double c_sq, int period) {
    // gap is a dummy here: delta = 0 makes the survival factor exactly 1.
    return fidelity_floor_approx(k, c_sq, period, 0.0, 1.0);
}

namespace detail {

inline long k_bar_impl(double c_sq, double eps, int period, double log2_z) {
    check_weight(c_sq);
    check_period(period);
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("target infidelity must lie in (0, 1)");
    const double denom = 2.0 + log2_z;
    if (!(denom > 0.0))
        throw std::invalid_argument("energy estimate too coarse: no net contraction per period");
    const double log2_target = std::log2(c_sq * eps / ((1.0 - eps) * (1.0 - c_sq)));
    const double k = -static_cast<double>(period) * log2_target / denom;
    if (k <= 0.0) return 0;  // initial overlap already beats the target
    return static_cast<long>(std::ceil(k));
}

}  // namespace detail

/// Iterations needed to guarantee infidelity <= eps from weight c_sq.
inline long k_bar_exact(double c_sq, double eps, int period) {
    return detail::k_bar_impl(c_sq, eps, period, 0.0);
}

inline long k_bar_approx(double c_sq, double eps, int period, double delta, double gap) {
    return detail::k_bar_impl(c_sq, eps, period, std::log2(detail::period_survival(delta, gap)));
}

/// Expected total evolution time of the repeat-until-success process with
/// full restarts: T(k) = (T(k-1) + t_k) / p_k, T(0) = 0.
inline double cost_recursion(std::span<const double> p, std::span<const double> t) {
    if (p.size() != t.size()) throw std::invalid_argument("cost_recursion: p and t length mismatch");
    double cost = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!(p[k] > 0.0 && p[k] <= 1.0))
            throw std::invalid_argument("cost_recursion: success probability outside (0, 1] at step " +
                                        std::to_string(k + 1));
        if (!(t[k] >= 0.0)) throw std::invalid_argument("cost_recursion: negative time at step " + std::to_string(k + 1));
        cost = (cost + t[k]) / p[k];
    }
    return cost;
}

/// Worst-case expected-cost bound: one period costs at most pi/gap of
/// evolution and succeeds with at least the probability ratio of the
/// slowest-decaying junk profile. delta > 0 uses the reduced-survival form.
inline double cost_bound(long k, double c_sq, int period, double gap, double delta = 0.0) {
    detail::check_weight(c_sq);
    detail::check_period(period);
    if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
    if (k < 0) throw std::invalid_argument("iteration count must be >= 0");
    const double z = detail::period_survival(delta, gap);
    const double period_cost = std::numbers::pi / gap;

    // Evaluate the recursion bottom-up over the chain k, k-N, k-2N, ... Each
    // link's success probability is the envelope ratio
    //   p_bar = [c z^ceil(m/N) + (1-c) 4^-floor(m/N)] /
    //           [c z^(ceil(m/N)-1) + (1-c) 4^(-floor(m/N)+1)],
    // i.e. the target decaying at its admissible maximum and the junk at its
    // admissible minimum. Terms are rescaled by their larger log2 so deep
    // recursions cannot underflow.
    const double log2_z = std::log2(z);
    const double log2_c = std::log2(c_sq);
    const double log2_j = std::log2(1.0 - c_sq);
    std::vector<long> chain;
    for (long m = k; m > 0; m -= period) chain.push_back(m);
    double cost = 0.0;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        const long m = *it;
        const double q = static_cast<double>(m / period);
        const double q_ceil = static_cast<double>((m + period - 1) / period);
        const auto log2_sum = [](double a, double b) {
            const double hi = std::max(a, b), lo = std::min(a, b);
            return hi + std::log2(1.0 + std::exp2(lo - hi));
        };
        const double log2_num = log2_sum(log2_c + q_ceil * log2_z, log2_j - 2.0 * q);
        const double log2_den = log2_sum(log2_c + (q_ceil - 1.0) * log2_z, log2_j - 2.0 * (q - 1.0));
        const double p_bar = std::exp2(log2_num - log2_den);
        cost = (cost + period_cost) / p_bar;
    }
    return cost;
}

/// Fidelity floor when each evolution call carries an operator-norm error of
/// at most eps_rte; may be negative once the accumulated error dominates.
inline double fidelity_floor_rte(long k, double c_sq, double zeta_sq, double xi_sq, double eps_rte) {
    detail::check_weight(c_sq);
    if (k < 0) throw std::invalid_argument("iteration count must be >= 0");
    if (!(zeta_sq > 0.0 && zeta_sq <= 1.0)) throw std::invalid_argument("zeta_sq must lie in (0, 1]");
    if (!(xi_sq >= 0.0)) throw std::invalid_argument("xi_sq must be >= 0");
    if (!(eps_rte >= 0.0)) throw std::invalid_argument("eps_rte must be >= 0");
    const double drift = 2.0 * static_cast<double>(k) * eps_rte;
    return (zeta_sq * c_sq - drift) / (zeta_sq * c_sq + xi_sq + drift);
}

/// Number of Pauli gadgets in N iterations of Trotterized evolution:
/// ceil(pi * L * n_trott / gap).
inline long pauli_gadget_count(std::size_t term_count, double n_trott, double gap) {
    if (term_count == 0) throw std::invalid_argument("term count must be >= 1");
    if (!(n_trott > 0.0)) throw std::invalid_argument("n_trott must be positive");
    if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
    const double raw = std::numbers::pi * static_cast<double>(term_count) * n_trott / gap;
    if (raw > 9.0e18) throw std::invalid_argument("gadget count overflows");
    return static_cast<long>(std::ceil(raw));
}

/// First-order estimate (1 - lambda)^N_Pauli of the fidelity reachable under
/// per-gadget depolarizing noise of strength lambda.
inline double noisy_fidelity_estimate(double lambda, long n_pauli) {
    if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in [0, 1)");
    if (n_pauli < 0) throw std::invalid_argument("gadget count must be >= 0");
    return std::pow(1.0 - lambda, static_cast<double>(n_pauli));
}

inline double noisy_fidelity_estimate(double lambda, std::size_t term_count, double n_trott, double gap) {
    return noisy_fidelity_estimate(lambda, pauli_gadget_count(term_count, n_trott, gap));
}

}  // namespace qprep
