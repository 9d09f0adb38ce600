#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qprep/bounds.hpp"
#include "qprep/prep.hpp"
#include "qprep/schedule.hpp"

using namespace qprep;

namespace {

constexpr double kPi = std::numbers::pi;

double cos_sq_product(const Schedule& s, double energy) {
    double prod = 1.0;
    for (double t : s.times) {
        const double c = std::cos(energy * t);
        prod *= c * c;
    }
    return prod;
}

/// Plain dense-grid maximum of the one-period cosine product, no refinement.
double gamma_grid_oracle(const Schedule& s, long points) {
    double best = 0.0;
    for (long i = 0; i <= points; ++i) {
        const double e = s.gap + (s.e_max - s.gap) * static_cast<double>(i) / static_cast<double>(points);
        best = std::max(best, cos_sq_product(s, e));
    }
    return best;
}

/// Smallest k whose continuous-exponent infidelity bound closes below eps:
/// ((1-c)/c) * 2^(-2k/N) * z^(-k/N) <= eps/(1-eps). This is the inequality
/// the closed-form ceiling expression inverts.
long k_bar_iteration_oracle(double c_sq, double eps, int period, double z) {
    const double target = std::log2(eps / (1.0 - eps));
    const double base = std::log2((1.0 - c_sq) / c_sq);
    for (long k = 0; k <= 2000000; ++k) {
        const double log2_r = base + (static_cast<double>(k) / period) * (-2.0 - std::log2(z));
        if (log2_r <= target) return k;
    }
    FAIL("iteration oracle did not close");
    return -1;
}

/// Expected time of the full-restart process, estimated by direct simulation.
double mc_restart_oracle(const std::vector<double>& p, const std::vector<double>& t, long trials,
                         std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double total = 0.0;
    for (long i = 0; i < trials; ++i) {
        bool done = false;
        while (!done) {
            done = true;
            for (std::size_t k = 0; k < p.size(); ++k) {
                total += t[k];
                if (unif(rng) >= p[k]) {
                    done = false;
                    break;
                }
            }
        }
    }
    return total / static_cast<double>(trials);
}

}  // namespace

TEST_CASE("gamma_numeric maximizes the one-period cosine product") {
    SECTION("degenerate interval gives an exact zero of the cosine") {
        const Schedule s = build_schedule(1.0, 1.0);
        CHECK(gamma_numeric(s) < 1e-15);
    }

    SECTION("stays at or below 1/4 on the paper-style interval") {
        const Schedule s = build_schedule(1.0, 8.0);
        const double g = gamma_numeric(s);
        CHECK(g <= 0.25 + 1e-9);
        CHECK(g > 0.0);
    }

    SECTION("matches a dense-grid oracle") {
        const Schedule s = build_schedule(1.0, 3.0);
        const double g = gamma_numeric(s);
        const double oracle = gamma_grid_oracle(s, 1000000);
        CHECK(g >= oracle - 1e-12);  // refinement only improves on the grid
        CHECK(g == Catch::Approx(oracle).margin(1e-8));
    }

    SECTION("gamma <= 1/4 over random spectral ranges") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> log_gap(-2.0, 1.0);
        std::uniform_real_distribution<double> log_ratio(0.0, 3.0);
        for (int rep = 0; rep < 200; ++rep) {
            const double gap = std::pow(10.0, log_gap(rng));
            const Schedule s = build_schedule(gap, gap * std::pow(10.0, log_ratio(rng)));
            CHECK(gamma_numeric(s) <= 0.25 + 1e-6);
        }
    }
}

TEST_CASE("xi_sq_bound applies one gamma factor per full period") {
    CHECK(xi_sq_bound(0, 0.2, 9, 0.25) == Catch::Approx(0.8).margin(1e-15));
    CHECK(xi_sq_bound(9, 0.2, 9, 0.25) == Catch::Approx(0.2).margin(1e-15));
    CHECK(xi_sq_bound(8, 0.2, 9, 0.25) == Catch::Approx(0.8).margin(1e-15));  // sub-period
    CHECK(xi_sq_bound(27, 0.5, 9, 0.1) == Catch::Approx(0.5 * 0.001).epsilon(1e-12));
}

TEST_CASE("fidelity_floor_exact closed form") {
    CHECK(fidelity_floor_exact(0, 0.2, 9) == Catch::Approx(0.2).margin(1e-15));
    CHECK(fidelity_floor_exact(1, 0.5, 1) == Catch::Approx(0.8).margin(1e-15));
    CHECK(fidelity_floor_exact(8, 0.2, 9) == Catch::Approx(0.2).margin(1e-15));  // no full period yet
    // floor approaches 1 monotonically at period boundaries
    double prev = 0.0;
    for (long q = 0; q < 40; ++q) {
        const double f = fidelity_floor_exact(q * 9, 0.2, 9);
        CHECK(f >= prev);
        prev = f;
    }
    CHECK(prev > 1.0 - 1e-9);
}

TEST_CASE("fidelity floors hold against simulated runs on random spectra") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        SynthSpec synth;
        synth.n_levels = 2 + static_cast<int>(unif(rng) * 62);
        synth.gap = 0.1 + unif(rng);
        synth.e_max = synth.gap * (1.0 + 9.0 * unif(rng));
        synth.target_weight = 0.05 + 0.9 * unif(rng);
        synth.seed = 1000 + static_cast<std::uint64_t>(rep);
        const SpectralState state = synth_spectrum(synth);
        const int period = schedule_period(synth.gap, synth.e_max);

        const bool offset_regime = rep % 2 == 1;
        const double delta = offset_regime ? synth.gap / 4.0 : 0.0;  // delta = gap'/3 below

        PrepConfig cfg;
        cfg.params = {delta, delta, synth.gap - delta, synth.e_max + delta};
        // gap/e_max measured from e_tilde = delta: worst-case shrink/grow
        cfg.stop = StopRule::FixedIterations;
        cfg.fixed_iterations = 3 * period + 2;
        cfg.max_iterations = cfg.fixed_iterations;

        const auto run = run_postselected(state, cfg);
        const double c_sq = std::norm(state.entries[0].amplitude);
        const int bound_period = schedule_period(cfg.params.gap, cfg.params.e_max);
        for (const auto& rec : run.trace.records) {
            const double floor = offset_regime
                                     ? fidelity_floor_approx(rec.k, c_sq, bound_period, delta, cfg.params.gap)
                                     : fidelity_floor_exact(rec.k, c_sq, bound_period);
            REQUIRE(rec.fidelity >= floor - 1e-12);
        }
    }
}

TEST_CASE("k_bar_exact matches the iteration oracle") {
    SECTION("already-converged input clamps to zero") { CHECK(k_bar_exact(0.999999, 0.1, 9) == 0); }

    SECTION("pinned instance") { CHECK(k_bar_exact(0.2, 1e-8, 9) == 129); }

    SECTION("oracle agreement and guarantee closure over random draws") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int rep = 0; rep < 100; ++rep) {
            const double c_sq = 0.01 + 0.98 * unif(rng);
            const double eps = std::pow(10.0, -1.0 - 9.0 * unif(rng));
            const int period = 1 + static_cast<int>(unif(rng) * 11);
            const long k_bar = k_bar_exact(c_sq, eps, period);
            CHECK(k_bar == k_bar_iteration_oracle(c_sq, eps, period, 1.0));
            // at the next period boundary the floored-exponent bound has closed
            const long boundary = period * ((k_bar + period - 1) / period);
            CHECK(fidelity_floor_exact(boundary, c_sq, period) >= 1.0 - eps - 1e-15);
        }
    }
}

TEST_CASE("cost_recursion evaluates the restart recursion") {
    SECTION("certain success sums the times") {
        const std::vector<double> p{1.0, 1.0, 1.0}, t{1.0, 2.0, 3.0};
        CHECK(cost_recursion(p, t) == Catch::Approx(6.0).margin(1e-15));
    }

    SECTION("single step") {
        const std::vector<double> p{0.5}, t{2.0};
        CHECK(cost_recursion(p, t) == Catch::Approx(4.0).margin(1e-15));
    }

    SECTION("matches a Monte-Carlo restart simulation within 5 percent") {
        const std::vector<double> p{0.9, 0.7, 0.8}, t{1.0, 2.0, 3.0};
        const double expected = cost_recursion(p, t);
        std::mt19937_64 rng(37);
        const double measured = mc_restart_oracle(p, t, 100000, rng);
        CHECK(measured == Catch::Approx(expected).epsilon(0.05));
    }

    SECTION("rejects invalid probabilities") {
        CHECK_THROWS_AS(cost_recursion(std::vector<double>{0.0}, std::vector<double>{1.0}), std::invalid_argument);
        CHECK_THROWS_AS(cost_recursion(std::vector<double>{1.2}, std::vector<double>{1.0}), std::invalid_argument);
        CHECK_THROWS_AS(cost_recursion(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("cost_bound closed form and dominance") {
    SECTION("base case") { CHECK(cost_bound(0, 0.2, 9, 1.0) == 0.0); }

    SECTION("single-period pinned arithmetic") {
        // p_bar(1) = (0.2 + 0.8/4) / (0.2 + 0.8) = 0.4, cost = pi / 0.4
        CHECK(cost_bound(1, 0.2, 1, 1.0) == Catch::Approx(kPi / 0.4).epsilon(1e-12));
    }

    SECTION("reduces to the exact regime at delta = 0") {
        for (long k : {1L, 5L, 9L, 40L})
            CHECK(cost_bound(k, 0.3, 4, 0.5, 0.0) == Catch::Approx(cost_bound(k, 0.3, 4, 0.5)).epsilon(1e-14));
    }

    SECTION("grows across period boundaries and worsens with offset") {
        double prev = 0.0;
        for (long q = 1; q <= 12; ++q) {
            const double exact = cost_bound(q * 5, 0.2, 5, 0.4);
            CHECK(exact > prev);
            prev = exact;
        }
        for (long k = 1; k <= 60; ++k)
            CHECK(cost_bound(k, 0.2, 5, 0.4, 0.4 / 4.0) >= cost_bound(k, 0.2, 5, 0.4));
    }

    SECTION("dominates the recursion on simulated instances, both regimes") {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int rep = 0; rep < 10; ++rep) {
            SynthSpec synth;
            synth.n_levels = 2 + static_cast<int>(unif(rng) * 30);
            synth.gap = 0.2 + unif(rng);
            synth.e_max = synth.gap * (1.0 + 7.0 * unif(rng));
            synth.target_weight = 0.1 + 0.8 * unif(rng);
            synth.seed = 5000 + static_cast<std::uint64_t>(rep);
            const SpectralState state = synth_spectrum(synth);
            const double c_sq = std::norm(state.entries[0].amplitude);
            const bool offset_regime = rep % 2 == 1;
            const double delta = offset_regime ? synth.gap / 4.0 : 0.0;

            PrepConfig cfg;
            cfg.params = {delta, delta, synth.gap - delta, synth.e_max + delta};
            const int period = schedule_period(cfg.params.gap, cfg.params.e_max);
            cfg.stop = StopRule::FixedIterations;
            cfg.fixed_iterations = k_bar_exact(c_sq, 1e-8, period);
            cfg.max_iterations = std::max(cfg.fixed_iterations, 1L);

            const auto run = run_postselected(state, cfg);
            std::vector<double> ps, ts;
            for (const auto& rec : run.trace.records) {
                if (rec.k == 0) continue;
                ps.push_back(rec.p);
                ts.push_back(rec.t);
            }
            const double actual = cost_recursion(ps, ts);
            const double bound = cost_bound(cfg.fixed_iterations, c_sq, period, cfg.params.gap, delta);
            REQUIRE(actual <= bound * (1.0 + 1e-10));
        }
    }
}

TEST_CASE("zeta_sq_floor per-period survival bound") {
    CHECK(zeta_sq_floor(7, 0.0, 1.0, 3) == 1.0);
    CHECK(zeta_sq_floor(9, 1.0 / 3.0, 1.0, 9) == Catch::Approx(1.0 - kPi * kPi / 27.0).epsilon(1e-14));
    CHECK_THROWS_AS(zeta_sq_floor(1, 1.0, 1.0, 3), std::invalid_argument);  // delta >= gap

    SECTION("true product of cosines never dips below the floor") {
        std::mt19937_64 rng(43);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int rep = 0; rep < 100; ++rep) {
            const double gap = 0.1 + unif(rng);
            const int period = 1 + static_cast<int>(unif(rng) * 9);
            const double e_max = gap * std::exp2(static_cast<double>(period) - 1.0);
            const Schedule s = build_schedule(gap, e_max);
            REQUIRE(s.period == period);
            const double delta = unif(rng) * gap / 2.0;
            const long k = 1 + static_cast<long>(unif(rng) * (5.0 * period - 1.0));
            double true_zeta_sq = 1.0;
            for (long m = 1; m <= k; ++m) {
                const double c = std::cos(delta * s.time_at(m));
                true_zeta_sq *= c * c;
            }
            CHECK(true_zeta_sq >= zeta_sq_floor(k, delta, gap, period) - 1e-12);
        }
    }
}

TEST_CASE("fidelity_floor_approx shallows the exact slope") {
    SECTION("delta = 0 reduces exactly") {
        for (long k : {0L, 3L, 9L, 100L})
            CHECK(fidelity_floor_approx(k, 0.2, 9, 0.0, 1.0) == fidelity_floor_exact(k, 0.2, 9));
    }

    SECTION("hand-evaluated point") {
        const double z = 1.0 - kPi * kPi / 27.0;
        const double expected = 1.0 / (1.0 + (0.8 / 0.2) * 0.25 / z);
        CHECK(fidelity_floor_approx(9, 0.2, 9, 1.0 / 3.0, 1.0) == Catch::Approx(expected).epsilon(1e-14));
    }

    SECTION("never above the exact floor") {
        std::mt19937_64 rng(47);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int rep = 0; rep < 100; ++rep) {
            const double c_sq = 0.05 + 0.9 * unif(rng);
            const int period = 1 + static_cast<int>(unif(rng) * 9);
            const double gap = 0.2 + unif(rng);
            const double delta = (0.05 + 0.4 * unif(rng)) * gap;
            const long k = 1 + static_cast<long>(unif(rng) * (10.0 * period));
            CHECK(fidelity_floor_approx(k, c_sq, period, delta, gap) <=
                  fidelity_floor_exact(k, c_sq, period) + 1e-15);
        }
    }
}

TEST_CASE("k_bar_approx closes the weakened guarantee") {
    SECTION("delta = 0 equals the exact count") {
        CHECK(k_bar_approx(0.2, 1e-8, 9, 0.0, 1.0) == k_bar_exact(0.2, 1e-8, 9));
    }

    SECTION("pinned instance needs more iterations than the exact regime") {
        const long k = k_bar_approx(0.2, 1e-8, 9, 1.0 / 3.0, 1.0);
        CHECK(k >= 129);
        const double z = 1.0 - kPi * kPi / 27.0;
        CHECK(k == k_bar_iteration_oracle(0.2, 1e-8, 9, z));
    }

    SECTION("oracle agreement and closure over random draws") {
        std::mt19937_64 rng(53);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int rep = 0; rep < 100; ++rep) {
            const double c_sq = 0.02 + 0.95 * unif(rng);
            const double eps = std::pow(10.0, -1.0 - 8.0 * unif(rng));
            const int period = 1 + static_cast<int>(unif(rng) * 11);
            const double gap = 0.1 + unif(rng);
            const double delta = unif(rng) * gap * 0.45;  // keeps the guarantee closable
            const double z = 1.0 - kPi * kPi * delta * delta / (3.0 * gap * gap);
            const long k_bar = k_bar_approx(c_sq, eps, period, delta, gap);
            CHECK(k_bar == k_bar_iteration_oracle(c_sq, eps, period, z));
            CHECK(k_bar >= k_bar_exact(c_sq, eps, period));
            const long boundary = period * ((k_bar + period - 1) / period);
            CHECK(fidelity_floor_approx(boundary, c_sq, period, delta, gap) >= 1.0 - eps - 1e-15);
        }
    }

    SECTION("offsets too large for the guarantee are an error") {
        // 2 + log2(1 - pi^2 d^2 / 3) <= 0 once d/gap > ~0.477
        CHECK_THROWS_AS(k_bar_approx(0.2, 1e-8, 9, 0.49, 1.0), std::invalid_argument);
    }
}

TEST_CASE("fidelity_floor_rte error budget") {
    SECTION("zero error reduces to the noiseless ratio") {
        CHECK(fidelity_floor_rte(50, 0.2, 1.0, 0.1, 0.0) == Catch::Approx(0.2 / 0.3).epsilon(1e-14));
    }

    SECTION("pinned arithmetic") {
        const double f = fidelity_floor_rte(100, 0.2, 1.0, 0.0, 1e-8);
        CHECK(f == Catch::Approx((0.2 - 2e-6) / (0.2 + 2e-6)).epsilon(1e-12));
        CHECK(f == Catch::Approx(0.99998).margin(1e-5));
    }

    SECTION("curve rises while the junk decays, then falls under the error drift") {
        const double c_sq = 0.2;
        const int period = 9;
        const double eps_rte = 1e-8;
        std::vector<double> floors;
        for (long k = 0; k <= 600; ++k)
            floors.push_back(fidelity_floor_rte(k, c_sq, 1.0, xi_sq_bound(k, c_sq, period, 0.25), eps_rte));
        const auto max_it = std::max_element(floors.begin(), floors.end());
        CHECK(max_it != floors.begin());       // rose
        CHECK(*floors.rbegin() < *max_it);     // then fell
        CHECK(*max_it < 1.0);
    }
}

TEST_CASE("noisy fidelity estimate") {
    CHECK(noisy_fidelity_estimate(0.0, 15, 100.0, 0.5) == 1.0);
    CHECK(pauli_gadget_count(15, 100.0, 0.5) == 9425);
    CHECK(noisy_fidelity_estimate(1e-5, 15, 100.0, 0.5) == Catch::Approx(0.9100).margin(5e-4));
    CHECK(noisy_fidelity_estimate(1e-5, 15, 100.0, 0.5) ==
          Catch::Approx(std::pow(1.0 - 1e-5, 9425.0)).epsilon(1e-14));
    CHECK_THROWS_AS(noisy_fidelity_estimate(1.0, 15, 100.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(pauli_gadget_count(0, 100.0, 0.5), std::invalid_argument);
}
