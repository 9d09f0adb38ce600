#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qprep/evolution.hpp"
#include "qprep/pauli.hpp"
#include "qprep/prep.hpp"
#include "qprep/schedule.hpp"
#include "qprep/spectral.hpp"

namespace qprep {

constexpr int kDefaultDensityCap = 7;

struct NoiseModel {
    double lambda = 0.0;  // per-qubit depolarizing probability after every gate
};

struct DensityMatrix {
    Eigen::MatrixXcd rho;
    int n_qubits = 0;

    static DensityMatrix pure(const Eigen::VectorXcd& psi, int max_qubits = kDefaultDensityCap) {
        int n = 0;
        while ((Eigen::Index{1} << n) < psi.size()) ++n;
        if ((Eigen::Index{1} << n) != psi.size())
            throw std::invalid_argument("state dimension is not a power of two");
        if (n > max_qubits)
            throw std::invalid_argument("register of " + std::to_string(n) + " qubits exceeds density cap of " +
                                        std::to_string(max_qubits));
        DensityMatrix d;
        d.n_qubits = n;
        d.rho = psi * psi.adjoint();
        return d;
    }

    double trace_real() const { return rho.trace().real(); }

    double fidelity_with(const Eigen::VectorXcd& phi) const {
        if (phi.size() != rho.rows()) throw std::invalid_argument("fidelity_with: dimension mismatch");
        return (phi.adjoint() * rho * phi)(0, 0).real();
    }
};

// --- Channels and gates -------------------------------------------------------

/// Single-qubit depolarizing channel on qubit q:
/// rho -> (1 - lambda) rho + (lambda/3)(X rho X + Y rho Y + Z rho Z).
/// Worked out per matrix entry: entries whose row and column agree on the
/// qubit's bit mix with their double-flipped partner, all others shrink by
/// (1 - 4 lambda / 3).
inline void depolarize_inplace(DensityMatrix& d, int qubit, double lambda) {
    if (qubit < 0 || qubit >= d.n_qubits) throw std::invalid_argument("depolarize: qubit index out of range");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("depolarize: lambda must lie in [0, 1]");
    if (lambda == 0.0) return;
    const auto dim = static_cast<std::uint64_t>(d.rho.rows());
    const std::uint64_t bit = std::uint64_t{1} << (d.n_qubits - 1 - qubit);
    const double keep = 1.0 - 2.0 * lambda / 3.0;
    const double mix = 2.0 * lambda / 3.0;
    const double shrink = 1.0 - 4.0 * lambda / 3.0;
    for (std::uint64_t i = 0; i < dim; ++i) {
        for (std::uint64_t j = 0; j < dim; ++j) {
            const bool bi = (i & bit) != 0, bj = (j & bit) != 0;
            if (bi != bj) {
                d.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *= shrink;
            } else if (!bi) {  // visit each {(i,j), (i^bit, j^bit)} pair once
                auto& a = d.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                auto& b = d.rho(static_cast<Eigen::Index>(i | bit), static_cast<Eigen::Index>(j | bit));
                const complexd na = keep * a + mix * b;
                const complexd nb = mix * a + keep * b;
                a = na;
                b = nb;
            }
        }
    }
}

inline DensityMatrix depolarize(DensityMatrix d, int qubit, double lambda) {
    depolarize_inplace(d, qubit, lambda);
    return d;
}

/// The gates the preparation circuit is compiled into for noise studies. The
/// ancilla is the last qubit of the register (least significant bit).
struct Gate {
    enum class Kind { HadamardAncilla, AncillaRz, PauliGadget };

    Kind kind = Kind::HadamardAncilla;
    double angle = 0.0;  // AncillaRz: R_z angle; PauliGadget: gadget angle theta
    PauliTerm term;      // PauliGadget only; spans the full joint register

    static Gate hadamard_on_ancilla() { return Gate{Kind::HadamardAncilla, 0.0, {}}; }
    static Gate ancilla_rz(double angle) { return Gate{Kind::AncillaRz, angle, {}}; }
    static Gate pauli_gadget(PauliTerm term, double angle) { return Gate{Kind::PauliGadget, angle, std::move(term)}; }
};

namespace detail {

inline void apply_gate_to_column(Eigen::VectorXcd& col, const Gate& gate, const PauliMasks& gadget_masks) {
    switch (gate.kind) {
        case Gate::Kind::HadamardAncilla: hadamard_ancilla(col); return;
        case Gate::Kind::AncillaRz: ancilla_rz(col, gate.angle); return;
        case Gate::Kind::PauliGadget: apply_pauli_gadget_inplace(col, gadget_masks, gate.angle); return;
    }
    throw std::logic_error("unknown gate kind");
}

/// rho -> U rho U^dagger for any register unitary available as a
/// column-kernel: apply U to the columns, adjoint, apply again, adjoint.
inline void conjugate_inplace(DensityMatrix& d, const Gate& gate) {
    const PauliMasks masks = gate.kind == Gate::Kind::PauliGadget ? masks_of(gate.term) : PauliMasks{};
    const Eigen::Index dim = d.rho.rows();
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            Eigen::VectorXcd col = d.rho.col(j);
            apply_gate_to_column(col, gate, masks);
            d.rho.col(j) = col;
        }
        d.rho = d.rho.adjoint().eval();
    }
}

}  // namespace detail

/// Applies the gate's unitary and then depolarizes every qubit of the
/// register with the model's strength.
inline void noisy_gate_inplace(DensityMatrix& d, const Gate& gate, const NoiseModel& noise) {
    detail::conjugate_inplace(d, gate);
    for (int q = 0; q < d.n_qubits; ++q) depolarize_inplace(d, q, noise.lambda);
}

inline DensityMatrix noisy_gate(DensityMatrix d, const Gate& gate, const NoiseModel& noise) {
    noisy_gate_inplace(d, gate, noise);
    return d;
}

/// Gate decomposition of one cosine-circuit iteration on the joint register:
/// ancilla Hadamard, ancilla R_z(-2 e_tilde t), one Z (x) P gadget per term
/// per slice, ancilla Hadamard. Gadget order matches trotter_evolve.
inline std::vector<Gate> circuit_gates(const PauliSum& h, double t, double e_tilde, long slices) {
    if (slices < 1) throw std::invalid_argument("circuit_gates: need at least one slice");
    std::vector<Gate> gates;
    gates.reserve(2 + static_cast<std::size_t>(slices) * h.terms.size() + 1);
    gates.push_back(Gate::hadamard_on_ancilla());
    gates.push_back(Gate::ancilla_rz(-2.0 * e_tilde * t));
    for (long s = 0; s < slices; ++s)
        for (const auto& term : h.terms)
            gates.push_back(Gate::pauli_gadget(detail::extend_with_ancilla_z(term),
                                               2.0 * term.coefficient * t / static_cast<double>(slices)));
    gates.push_back(Gate::hadamard_on_ancilla());
    return gates;
}

// --- Noisy preparation runs ---------------------------------------------------

struct NoisyRecord {
    long k = 0;
    double fidelity = 0.0;
    double P = 1.0;  // cumulative postselection probability
};

struct NoisyTrace {
    std::vector<NoisyRecord> records;
};

namespace detail {

inline DensityMatrix embed_ancilla_zero(const DensityMatrix& d) {
    DensityMatrix joint;
    joint.n_qubits = d.n_qubits + 1;
    const Eigen::Index dim = d.rho.rows();
    joint.rho = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) joint.rho(2 * i, 2 * j) = d.rho(i, j);
    return joint;
}

inline std::pair<DensityMatrix, double> project_ancilla_zero(const DensityMatrix& joint) {
    const Eigen::Index dim = joint.rho.rows() / 2;
    DensityMatrix d;
    d.n_qubits = joint.n_qubits - 1;
    d.rho.resize(dim, dim);
    double p = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) p += joint.rho(2 * i, 2 * i).real();
    if (!(p > kMinProbability)) throw std::runtime_error("postselection probability vanished");
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) d.rho(i, j) = joint.rho(2 * i, 2 * j) / p;
    return {std::move(d), p};
}

}  // namespace detail

/// Postselected preparation on a density matrix with per-gate depolarizing
/// noise, always running the cosine circuit compiled to gates with the given
/// slice density. The fidelity column is measured against the target
/// eigenvector of the noiseless Hamiltonian.
inline NoisyTrace run_noisy_prep(const DensityMatrix& rho0, const PauliSum& h, std::size_t target,
                                 const PrepConfig& cfg, double slices_per_unit_time, const NoiseModel& noise,
                                 long iterations, int max_qubits = kDefaultDensityCap) {
    validate(cfg.params);
    if (iterations < 0) throw std::invalid_argument("iteration count must be >= 0");
    if (rho0.n_qubits != h.n_qubits) throw std::invalid_argument("run_noisy_prep: register mismatch");
    if (h.n_qubits + 1 > max_qubits)
        throw std::invalid_argument("joint register of " + std::to_string(h.n_qubits + 1) +
                                    " qubits exceeds density cap of " + std::to_string(max_qubits));
    if (!(slices_per_unit_time > 0.0)) throw std::invalid_argument("slice density must be positive");
    const Spectrum spec = diagonalize(h);
    if (static_cast<Eigen::Index>(target) >= spec.size()) throw std::invalid_argument("target index out of range");
    const Eigen::VectorXcd phi = spec.eigenvectors.col(static_cast<Eigen::Index>(target));
    const Schedule sched = build_schedule(cfg.params.gap, cfg.params.e_max);

    NoisyTrace trace;
    DensityMatrix state = rho0;
    double big_p = 1.0;
    trace.records.push_back({0, state.fidelity_with(phi), 1.0});
    for (long k = 1; k <= iterations; ++k) {
        const double t = sched.time_at(k);
        const long slices = std::max<long>(1, static_cast<long>(std::ceil(std::abs(t) * slices_per_unit_time)));
        DensityMatrix joint = detail::embed_ancilla_zero(state);
        for (const Gate& g : circuit_gates(h, t, cfg.params.e_tilde, slices)) noisy_gate_inplace(joint, g, noise);
        auto [projected, p] = detail::project_ancilla_zero(joint);
        state = std::move(projected);
        big_p *= p;
        trace.records.push_back({k, state.fidelity_with(phi), big_p});
    }
    return trace;
}

/// Mean fidelity over the trailing window of a noisy run; the convergence
/// plateau when the window covers the last couple of schedule periods.
inline double plateau_mean(const NoisyTrace& trace, long window) {
    if (window < 1) throw std::invalid_argument("plateau window must be >= 1");
    if (static_cast<long>(trace.records.size()) < window)
        throw std::invalid_argument("trace shorter than plateau window");
    double sum = 0.0;
    for (std::size_t i = trace.records.size() - static_cast<std::size_t>(window); i < trace.records.size(); ++i)
        sum += trace.records[i].fidelity;
    return sum / static_cast<double>(window);
}

}  // namespace qprep
