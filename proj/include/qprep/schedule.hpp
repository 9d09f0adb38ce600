#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qprep {

/// Cyclic measurement-time schedule t_l = pi / (2^l * gap) for l = 1..N with
/// N = ceil(log2(e_max / gap)) + 1. Times are longest-first within a period
/// and repeat cyclically; one period costs at most pi / gap of evolution.
struct Schedule {
    int period = 0;
    std::vector<double> times;
    double gap = 0.0;
    double e_max = 0.0;

    /// Time used by iteration k (1-based): times[(k - 1) mod N].
    double time_at(long k) const {
        if (k < 1) throw std::invalid_argument("iteration index must be >= 1");
        return times[static_cast<std::size_t>((k - 1) % period)];
    }

    double period_time() const {
        double total = 0.0;
        for (double t : times) total += t;
        return total;
    }
};

inline int schedule_period(double gap, double e_max) {
    if (!(gap > 0.0)) throw std::invalid_argument("schedule: gap must be positive");
    if (!(e_max >= gap)) throw std::invalid_argument("schedule: e_max must be at least the gap");
    return static_cast<int>(std::ceil(std::log2(e_max / gap))) + 1;
}

inline Schedule build_schedule(double gap, double e_max) {
    Schedule s;
    s.period = schedule_period(gap, e_max);
    s.gap = gap;
    s.e_max = e_max;
    s.times.resize(static_cast<std::size_t>(s.period));
    double t = std::numbers::pi / (2.0 * gap);
    for (auto& slot : s.times) {
        slot = t;
        t /= 2.0;
    }
    return s;
}

}  // namespace qprep
