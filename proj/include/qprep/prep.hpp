#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qprep/evolution.hpp"
#include "qprep/schedule.hpp"
#include "qprep/spectral.hpp"

namespace qprep {

enum class CircuitVariant { Cosine, PhaseEstimation };
enum class StopRule { FidelityTarget, FixedIterations };
enum class RunMode { Postselect, Sampled };

struct PrepConfig {
    SpectralParams params;
    CircuitVariant variant = CircuitVariant::Cosine;
    RunMode mode = RunMode::Postselect;
    StopRule stop = StopRule::FidelityTarget;
    double epsilon = 1e-8;       // FidelityTarget: run until fidelity >= 1 - epsilon
    long fixed_iterations = 0;   // FixedIterations: run exactly this many steps
    long max_iterations = 100000;
    std::uint64_t rng_seed = 0;  // sampled runs only
    long restart_cap = 1000000;  // sampled runs only
};

/// One row per iteration: the time evolved, the conditional success
/// probability p_k of that step, the cumulative success probability P_k, the
/// fidelity with the target after postselection, and the accumulated
/// evolution time of the attempt. Row k = 0 describes the initial state.
struct PrepRecord {
    long k = 0;
    double t = 0.0;
    double p = 1.0;
    double P = 1.0;
    double fidelity = 0.0;
    double cum_sim_time = 0.0;
};

struct PrepTrace {
    std::vector<PrepRecord> records;
    long restarts = 0;
    double total_sim_time = 0.0;  // evolution time across all attempts, failed ones included

    const PrepRecord& last() const {
        if (records.empty()) throw std::logic_error("empty trace");
        return records.back();
    }
};

namespace detail {

constexpr double kMinProbability = 1e-14;

inline void check_prep_config(const PrepConfig& cfg) {
    validate(cfg.params);
    if (cfg.stop == StopRule::FidelityTarget && !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
        throw std::invalid_argument("target infidelity must lie in (0, 1)");
    if (cfg.stop == StopRule::FixedIterations && cfg.fixed_iterations < 0)
        throw std::invalid_argument("fixed iteration count must be >= 0");
    if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
}

inline bool done(const PrepConfig& cfg, long k, double fidelity) {
    if (cfg.stop == StopRule::FixedIterations) return k >= cfg.fixed_iterations;
    return fidelity >= 1.0 - cfg.epsilon;
}

inline void check_budget(const PrepConfig& cfg, long k) {
    if (cfg.stop == StopRule::FixedIterations) {
        if (cfg.fixed_iterations > cfg.max_iterations)
            throw std::invalid_argument("fixed iteration count exceeds max_iterations");
        return;
    }
    if (k > cfg.max_iterations)
        throw std::runtime_error("fidelity target not reached within max_iterations = " +
                                 std::to_string(cfg.max_iterations));
}

}  // namespace detail

// --- Analytic spectral path --------------------------------------------------
//
// When the state is already written in the eigenbasis, one iteration with
// time t multiplies each level amplitude by cos((E_j - e_tilde) t) and
// renormalizes; success probabilities and fidelities follow directly.

struct AnalyticState {
    SpectralState state;  // normalized post-measurement state
    double P = 1.0;       // probability that every ancilla read gave 0
};

/// Closed-form state after the given sequence of iteration times, conditioned
/// on all-zero ancilla outcomes.
inline AnalyticState analytic_state(const SpectralState& initial, const std::vector<double>& times, double e_tilde) {
    if (std::abs(norm_sq(initial) - 1.0) > 1e-10)
        throw std::invalid_argument("initial spectral state is not normalized");
    AnalyticState out;
    out.state = initial;
    double p = 0.0;
    for (auto& level : out.state.entries) {
        for (double t : times) level.amplitude *= std::cos((level.energy - e_tilde) * t);
        p += std::norm(level.amplitude);
    }
    if (!(p > detail::kMinProbability))
        throw std::runtime_error("success probability vanished");
    out.P = p;
    const double scale = 1.0 / std::sqrt(p);
    for (auto& level : out.state.entries) level.amplitude *= scale;
    return out;
}

struct SpectralPrepResult {
    PrepTrace trace;
    SpectralState state;  // normalized, postselected end state of the successful attempt
};

inline SpectralPrepResult run_postselected(const SpectralState& initial, const PrepConfig& cfg) {
    detail::check_prep_config(cfg);
    if (initial.target_index >= initial.entries.size()) throw std::invalid_argument("target_index out of range");
    if (std::abs(norm_sq(initial) - 1.0) > 1e-10)
        throw std::invalid_argument("initial spectral state is not normalized");
    const Schedule sched = build_schedule(cfg.params.gap, cfg.params.e_max);

    SpectralPrepResult out;
    out.state = initial;
    auto& entries = out.state.entries;
    double big_p = 1.0;
    double fid = std::norm(entries[initial.target_index].amplitude);
    double cum = 0.0;
    out.trace.records.push_back({0, 0.0, 1.0, 1.0, fid, 0.0});

    long k = 0;
    while (!detail::done(cfg, k, fid)) {
        ++k;
        detail::check_budget(cfg, k);
        const double t = sched.time_at(k);
        double p_new = 0.0;
        for (auto& level : entries) {
            level.amplitude *= std::cos((level.energy - cfg.params.e_tilde) * t);
            p_new += std::norm(level.amplitude);
        }
        const double p = p_new / big_p;
        if (!(p > detail::kMinProbability))
            throw std::runtime_error("success probability vanished at iteration " + std::to_string(k));
        big_p = p_new;
        fid = std::norm(entries[out.state.target_index].amplitude) / big_p;
        cum += t;
        out.trace.records.push_back({k, t, p, big_p, fid, cum});
    }
    out.trace.total_sim_time = cum;

    const double scale = 1.0 / std::sqrt(big_p);
    for (auto& level : entries) level.amplitude *= scale;
    return out;
}

inline SpectralPrepResult run_sampled(const SpectralState& initial, const PrepConfig& cfg) {
    detail::check_prep_config(cfg);
    if (cfg.stop != StopRule::FixedIterations || cfg.fixed_iterations < 1)
        throw std::invalid_argument("sampled runs need a fixed iteration count");
    if (std::abs(norm_sq(initial) - 1.0) > 1e-10)
        throw std::invalid_argument("initial spectral state is not normalized");
    detail::check_budget(cfg, cfg.fixed_iterations);
    const Schedule sched = build_schedule(cfg.params.gap, cfg.params.e_max);
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SpectralPrepResult out;
    double total_time = 0.0;
    long restarts = 0;
    while (true) {
        out.state = initial;
        auto& entries = out.state.entries;
        out.trace.records.clear();
        double big_p = 1.0;
        double fid = std::norm(entries[initial.target_index].amplitude);
        double cum = 0.0;
        out.trace.records.push_back({0, 0.0, 1.0, 1.0, fid, 0.0});
        bool failed = false;

        for (long k = 1; k <= cfg.fixed_iterations; ++k) {
            const double t = sched.time_at(k);
            cum += t;
            double p_new = 0.0;
            for (auto& level : entries) {
                level.amplitude *= std::cos((level.energy - cfg.params.e_tilde) * t);
                p_new += std::norm(level.amplitude);
            }
            const double p = p_new / big_p;
            if (!(p > detail::kMinProbability))
                throw std::runtime_error("success probability vanished at iteration " + std::to_string(k));
            if (unif(rng) >= p) {  // ancilla read |1>: discard and restart
                failed = true;
                break;
            }
            big_p = p_new;
            fid = std::norm(entries[out.state.target_index].amplitude) / big_p;
            out.trace.records.push_back({k, t, p, big_p, fid, cum});
        }

        total_time += cum;
        if (!failed) {
            const double scale = 1.0 / std::sqrt(big_p);
            for (auto& level : entries) level.amplitude *= scale;
            break;
        }
        if (++restarts > cfg.restart_cap)
            throw std::runtime_error("restart cap of " + std::to_string(cfg.restart_cap) + " attempts exceeded");
    }
    out.trace.restarts = restarts;
    out.trace.total_sim_time = total_time;
    return out;
}

struct McCostSummary {
    long trials = 0;
    double mean_total_time = 0.0;
    double stddev_total_time = 0.0;
    double mean_restarts = 0.0;
};

/// Monte-Carlo estimate of the expected total evolution time of the sampled
/// repeat-until-success process. Trials share one RNG stream seeded from the
/// config, so the result is deterministic for a given seed.
inline McCostSummary mc_expected_cost(const SpectralState& initial, const PrepConfig& cfg, long trials) {
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    double sum = 0.0, sum_sq = 0.0, restarts = 0.0;
    PrepConfig trial_cfg = cfg;
    for (long i = 0; i < trials; ++i) {
        trial_cfg.rng_seed = cfg.rng_seed + static_cast<std::uint64_t>(i);
        const auto result = run_sampled(initial, trial_cfg);
        sum += result.trace.total_sim_time;
        sum_sq += result.trace.total_sim_time * result.trace.total_sim_time;
        restarts += static_cast<double>(result.trace.restarts);
    }
    McCostSummary s;
    s.trials = trials;
    s.mean_total_time = sum / static_cast<double>(trials);
    const double var = std::max(0.0, sum_sq / static_cast<double>(trials) - s.mean_total_time * s.mean_total_time);
    s.stddev_total_time = std::sqrt(var);
    s.mean_restarts = restarts / static_cast<double>(trials);
    return s;
}

// --- Explicit circuit path ----------------------------------------------------
//
// One iteration runs the ancilla circuit on the joint register and projects
// onto ancilla |0>. The cosine variant evolves both ancilla branches in
// opposite time directions around an R_z(-2 e_tilde t) phase correction; the
// phase-estimation variant applies a controlled U(2t) and an ancilla phase
// gate. Both produce identical outcome statistics; the retained states
// differ per level by a pure phase.

struct IterationOutcome {
    Eigen::VectorXcd state;  // postselected, renormalized system state
    double p = 0.0;          // probability of reading ancilla |0>
};

inline IterationOutcome iterate_once(const Propagator& prop, const Eigen::VectorXcd& psi, double t, double e_tilde,
                                     CircuitVariant variant) {
    const Eigen::Index dim = psi.size();
    Eigen::VectorXcd joint = Eigen::VectorXcd::Zero(2 * dim);
    for (Eigen::Index i = 0; i < dim; ++i) joint(2 * i) = psi(i);

    hadamard_ancilla(joint);
    if (variant == CircuitVariant::Cosine) {
        ancilla_rz(joint, -2.0 * e_tilde * t);
        two_sided_evolve(prop, joint, t);
    } else {
        controlled_evolve(prop, joint, 2.0 * t);
        ancilla_phase(joint, 2.0 * e_tilde * t);
    }
    hadamard_ancilla(joint);

    IterationOutcome out;
    out.state.resize(dim);
    double p = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        out.state(i) = joint(2 * i);
        p += std::norm(joint(2 * i));
    }
    if (!(p > detail::kMinProbability))
        throw std::runtime_error("success probability vanished");
    out.p = p;
    out.state /= std::sqrt(p);
    return out;
}

struct CircuitPrepResult {
    PrepTrace trace;
    Eigen::VectorXcd state;
};

/// Circuit-level postselected run; the fidelity column is computed against
/// the given eigenvector column of the spectrum (oracle access).
inline CircuitPrepResult run_postselected(const Eigen::VectorXcd& psi0, const Spectrum& spec, std::size_t target,
                                          const PrepConfig& cfg, const Propagator& prop) {
    detail::check_prep_config(cfg);
    if (static_cast<Eigen::Index>(target) >= spec.size()) throw std::invalid_argument("target index out of range");
    require_normalized(psi0);
    const Schedule sched = build_schedule(cfg.params.gap, cfg.params.e_max);
    const Eigen::VectorXcd phi = spec.eigenvectors.col(static_cast<Eigen::Index>(target));

    CircuitPrepResult out;
    out.state = psi0;
    double big_p = 1.0;
    double fid = std::norm(phi.dot(out.state));
    double cum = 0.0;
    out.trace.records.push_back({0, 0.0, 1.0, 1.0, fid, 0.0});

    long k = 0;
    while (!detail::done(cfg, k, fid)) {
        ++k;
        detail::check_budget(cfg, k);
        const double t = sched.time_at(k);
        auto step = iterate_once(prop, out.state, t, cfg.params.e_tilde, cfg.variant);
        out.state = std::move(step.state);
        big_p *= step.p;
        fid = std::norm(phi.dot(out.state));
        cum += t;
        out.trace.records.push_back({k, t, step.p, big_p, fid, cum});
    }
    out.trace.total_sim_time = cum;
    return out;
}

inline CircuitPrepResult run_sampled(const Eigen::VectorXcd& psi0, const Spectrum& spec, std::size_t target,
                                     const PrepConfig& cfg, const Propagator& prop) {
    detail::check_prep_config(cfg);
    if (cfg.stop != StopRule::FixedIterations || cfg.fixed_iterations < 1)
        throw std::invalid_argument("sampled runs need a fixed iteration count");
    if (static_cast<Eigen::Index>(target) >= spec.size()) throw std::invalid_argument("target index out of range");
    require_normalized(psi0);
    detail::check_budget(cfg, cfg.fixed_iterations);
    const Schedule sched = build_schedule(cfg.params.gap, cfg.params.e_max);
    const Eigen::VectorXcd phi = spec.eigenvectors.col(static_cast<Eigen::Index>(target));
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    CircuitPrepResult out;
    double total_time = 0.0;
    long restarts = 0;
    while (true) {
        out.state = psi0;
        out.trace.records.clear();
        double big_p = 1.0;
        double fid = std::norm(phi.dot(out.state));
        double cum = 0.0;
        out.trace.records.push_back({0, 0.0, 1.0, 1.0, fid, 0.0});
        bool failed = false;

        for (long k = 1; k <= cfg.fixed_iterations; ++k) {
            const double t = sched.time_at(k);
            cum += t;
            auto step = iterate_once(prop, out.state, t, cfg.params.e_tilde, cfg.variant);
            if (unif(rng) >= step.p) {
                failed = true;
                break;
            }
            out.state = std::move(step.state);
            big_p *= step.p;
            fid = std::norm(phi.dot(out.state));
            out.trace.records.push_back({k, t, step.p, big_p, fid, cum});
        }

        total_time += cum;
        if (!failed) break;
        if (++restarts > cfg.restart_cap)
            throw std::runtime_error("restart cap of " + std::to_string(cfg.restart_cap) + " attempts exceeded");
    }
    out.trace.restarts = restarts;
    out.trace.total_sim_time = total_time;
    return out;
}

/// Runs both circuit variants side by side with exact propagation and
/// reports the largest deviations in per-step success probability and
/// post-measurement fidelity.
struct VariantDeviation {
    double max_fidelity_dev = 0.0;
    double max_prob_dev = 0.0;
};

inline VariantDeviation variant_equivalence_check(const Eigen::VectorXcd& psi0, const Spectrum& spec,
                                                  std::size_t target, const SpectralParams& params, long iterations) {
    if (iterations < 1) throw std::invalid_argument("need at least one iteration");
    PrepConfig cfg;
    cfg.params = params;
    cfg.stop = StopRule::FixedIterations;
    cfg.fixed_iterations = iterations;
    cfg.max_iterations = std::max(iterations, long{1});
    const Propagator prop = Propagator::exact(spec);

    cfg.variant = CircuitVariant::Cosine;
    const auto cos_run = run_postselected(psi0, spec, target, cfg, prop);
    cfg.variant = CircuitVariant::PhaseEstimation;
    const auto pe_run = run_postselected(psi0, spec, target, cfg, prop);

    VariantDeviation dev;
    for (std::size_t i = 0; i < cos_run.trace.records.size(); ++i) {
        dev.max_fidelity_dev =
            std::max(dev.max_fidelity_dev, std::abs(cos_run.trace.records[i].fidelity - pe_run.trace.records[i].fidelity));
        dev.max_prob_dev = std::max(dev.max_prob_dev, std::abs(cos_run.trace.records[i].p - pe_run.trace.records[i].p));
    }
    return dev;
}

}  // namespace qprep
