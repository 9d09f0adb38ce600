#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qprep/pauli.hpp"
#include "qprep/states.hpp"

namespace qprep {

/// Dense eigendecomposition of a Hamiltonian: ascending energies and the
/// matching eigenvector columns.
struct Spectrum {
    Eigen::VectorXd energies;
    Eigen::MatrixXcd eigenvectors;

    Eigen::Index size() const { return energies.size(); }
};

inline Spectrum diagonalize(const PauliSum& h, int max_qubits = kDefaultDenseCap) {
    const Eigen::MatrixXcd m = to_dense(h, max_qubits);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed to converge");
    Spectrum s;
    s.energies = solver.eigenvalues();
    s.eigenvectors = solver.eigenvectors();
    return s;
}

/// A state written in an eigenbasis: one (energy, amplitude) entry per level,
/// with entries[target_index] the level being prepared. Levels whose weight
/// is at or below occupancy_threshold are ignored when spectral ranges are
/// derived from the state.
struct SpectralLevel {
    double energy = 0.0;
    complexd amplitude = 0.0;
};

struct SpectralState {
    std::vector<SpectralLevel> entries;
    std::size_t target_index = 0;
    double occupancy_threshold = 0.0;

    std::size_t size() const { return entries.size(); }
};

inline double norm_sq(const SpectralState& s) {
    double total = 0.0;
    for (const auto& e : s.entries) total += std::norm(e.amplitude);
    return total;
}

inline double target_weight(const SpectralState& s) {
    if (s.target_index >= s.entries.size()) throw std::invalid_argument("target_index out of range");
    return std::norm(s.entries[s.target_index].amplitude);
}

/// Expands a statevector in the eigenbasis of a spectrum. Degenerate levels
/// keep one entry per eigenvector column; the caller picks the target column.
inline SpectralState spectral_overlaps(const Spectrum& spec, const Eigen::VectorXcd& psi,
                                       std::size_t target_index = 0, double occupancy_threshold = 0.0) {
    if (psi.size() != spec.eigenvectors.rows())
        throw std::invalid_argument("state dimension does not match spectrum");
    if (static_cast<Eigen::Index>(target_index) >= spec.size())
        throw std::invalid_argument("target_index out of range");
    require_normalized(psi);
    SpectralState out;
    out.target_index = target_index;
    out.occupancy_threshold = occupancy_threshold;
    out.entries.resize(static_cast<std::size_t>(spec.size()));
    const Eigen::VectorXcd amps = spec.eigenvectors.adjoint() * psi;
    for (Eigen::Index j = 0; j < spec.size(); ++j)
        out.entries[static_cast<std::size_t>(j)] = {spec.energies(j), amps(j)};
    return out;
}

/// Spectral inputs of a preparation run, all relative to the energy estimate
/// e_tilde of the target level: delta = |e_tilde - E_target|, gap = the
/// smallest |E_j - e_tilde| over occupied non-target levels, e_max = the
/// largest. Requires delta < gap <= e_max.
struct SpectralParams {
    double e_tilde = 0.0;
    double delta = 0.0;
    double gap = 0.0;
    double e_max = 0.0;
};

inline void validate(const SpectralParams& p) {
    if (!(p.gap > 0.0)) throw std::invalid_argument("spectral gap must be positive");
    if (!(p.e_max >= p.gap)) throw std::invalid_argument("e_max must be at least the gap");
    if (!(p.delta >= 0.0 && p.delta < p.gap))
        throw std::invalid_argument("energy-estimate offset delta must satisfy 0 <= delta < gap");
}

/// Measures delta/gap/e_max for a given energy estimate from the occupied
/// levels of a spectral state. Levels with weight <= occupancy_threshold are
/// skipped, as is the target level itself.
inline SpectralParams derive_params(const SpectralState& s, double e_tilde) {
    if (s.target_index >= s.entries.size()) throw std::invalid_argument("target_index out of range");
    SpectralParams p;
    p.e_tilde = e_tilde;
    p.delta = std::abs(e_tilde - s.entries[s.target_index].energy);
    double gap = std::numeric_limits<double>::infinity();
    double e_max = 0.0;
    for (std::size_t j = 0; j < s.entries.size(); ++j) {
        if (j == s.target_index) continue;
        if (std::norm(s.entries[j].amplitude) <= s.occupancy_threshold) continue;
        const double dist = std::abs(s.entries[j].energy - e_tilde);
        gap = std::min(gap, dist);
        e_max = std::max(e_max, dist);
    }
    if (!std::isfinite(gap))
        throw std::invalid_argument("cannot derive spectral ranges: no occupied level besides the target");
    p.gap = gap;
    p.e_max = e_max;
    validate(p);
    return p;
}

/// Same, but with an explicit occupancy threshold overriding the one stored
/// on the state.
inline SpectralParams derive_params(const SpectralState& s, double e_tilde, double occupancy_threshold) {
    SpectralState copy = s;
    copy.occupancy_threshold = occupancy_threshold;
    return derive_params(copy, e_tilde);
}

/// Synthetic spectral states: the target level sits at energy 0 with a
/// prescribed weight, and the remaining levels are spread uniformly at random
/// over [gap, e_max] relative to it.
enum class WeightRule { Uniform, ExponentialDecay, Explicit };

struct SynthSpec {
    int n_levels = 2;
    double gap = 0.0;
    double e_max = 0.0;
    WeightRule rule = WeightRule::Uniform;
    double target_weight = 0.5;        // used by Uniform / ExponentialDecay
    std::vector<double> weights;       // used by Explicit; index 0 is the target
    std::uint64_t seed = 0;
};

inline SpectralState synth_spectrum(const SynthSpec& spec) {
    if (spec.n_levels < 2) throw std::invalid_argument("synth_spectrum: need at least two levels");
    if (!(spec.gap > 0.0) || !(spec.e_max >= spec.gap))
        throw std::invalid_argument("synth_spectrum: need 0 < gap <= e_max");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(spec.gap, spec.e_max);
    std::vector<double> energies(static_cast<std::size_t>(spec.n_levels) - 1);
    for (auto& e : energies) e = (spec.e_max > spec.gap) ? unif(rng) : spec.gap;
    std::sort(energies.begin(), energies.end());

    SpectralState out;
    out.target_index = 0;
    out.entries.resize(static_cast<std::size_t>(spec.n_levels));
    out.entries[0] = {0.0, 0.0};
    for (std::size_t j = 1; j < out.entries.size(); ++j) out.entries[j] = {energies[j - 1], 0.0};

    switch (spec.rule) {
        case WeightRule::Uniform: {
            if (!(spec.target_weight > 0.0 && spec.target_weight < 1.0))
                throw std::invalid_argument("synth_spectrum: target_weight must lie in (0, 1)");
            out.entries[0].amplitude = std::sqrt(spec.target_weight);
            const double rest = std::sqrt((1.0 - spec.target_weight) / (spec.n_levels - 1));
            for (std::size_t j = 1; j < out.entries.size(); ++j) out.entries[j].amplitude = rest;
            break;
        }
        case WeightRule::ExponentialDecay: {
            // Amplitudes of the non-target levels decay as exp(-(E_j - E_target)),
            // rescaled so the total weight is 1.
            if (!(spec.target_weight > 0.0 && spec.target_weight < 1.0))
                throw std::invalid_argument("synth_spectrum: target_weight must lie in (0, 1)");
            out.entries[0].amplitude = std::sqrt(spec.target_weight);
            double tail = 0.0;
            for (std::size_t j = 1; j < out.entries.size(); ++j) {
                const double a = std::exp(-(out.entries[j].energy - 0.0));
                out.entries[j].amplitude = a;
                tail += a * a;
            }
            const double scale = std::sqrt((1.0 - spec.target_weight) / tail);
            for (std::size_t j = 1; j < out.entries.size(); ++j) out.entries[j].amplitude *= scale;
            break;
        }
        case WeightRule::Explicit: {
            if (spec.weights.size() != out.entries.size())
                throw std::invalid_argument("synth_spectrum: explicit weights must list every level");
            double total = 0.0;
            for (double w : spec.weights) {
                if (w < 0.0) throw std::invalid_argument("synth_spectrum: negative weight");
                total += w;
            }
            if (std::abs(total - 1.0) > 1e-9)
                throw std::invalid_argument("synth_spectrum: explicit weights must sum to 1");
            if (!(spec.weights[0] > 0.0)) throw std::invalid_argument("synth_spectrum: target weight must be positive");
            for (std::size_t j = 0; j < out.entries.size(); ++j)
                out.entries[j].amplitude = std::sqrt(spec.weights[j] / total);
            break;
        }
    }
    return out;
}

}  // namespace qprep
