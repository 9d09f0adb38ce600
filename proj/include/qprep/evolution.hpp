#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qprep/pauli.hpp"
#include "qprep/spectral.hpp"

namespace qprep {

/// psi <- P psi for a unit-coefficient Pauli string.
inline void apply_pauli_string_inplace(Eigen::VectorXcd& psi, const PauliMasks& m) {
    const auto dim = static_cast<std::uint64_t>(psi.size());
    if (m.flip == 0) {
        for (std::uint64_t b = 0; b < dim; ++b) psi(static_cast<Eigen::Index>(b)) *= pauli_phase(m, b);
        return;
    }
    for (std::uint64_t b = 0; b < dim; ++b) {
        const std::uint64_t partner = b ^ m.flip;
        if (partner < b) continue;
        const complexd vb = psi(static_cast<Eigen::Index>(b));
        const complexd vp = psi(static_cast<Eigen::Index>(partner));
        psi(static_cast<Eigen::Index>(b)) = pauli_phase(m, partner) * vp;
        psi(static_cast<Eigen::Index>(partner)) = pauli_phase(m, b) * vb;
    }
}

inline Eigen::VectorXcd apply_pauli_string(const PauliTerm& term, const Eigen::VectorXcd& psi) {
    if ((Eigen::Index{1} << term.n_qubits()) != psi.size())
        throw std::invalid_argument("apply_pauli_string: dimension mismatch");
    Eigen::VectorXcd out = psi;
    apply_pauli_string_inplace(out, masks_of(term));
    return out;
}

/// psi <- exp(-i theta/2 P) psi = [cos(theta/2) I - i sin(theta/2) P] psi.
/// The term's coefficient is ignored; fold it into theta.
inline void apply_pauli_gadget_inplace(Eigen::VectorXcd& psi, const PauliMasks& m, double theta) {
    const double c = std::cos(0.5 * theta);
    const complexd is(0.0, std::sin(0.5 * theta));
    const auto dim = static_cast<std::uint64_t>(psi.size());
    if (m.flip == 0) {
        for (std::uint64_t b = 0; b < dim; ++b)
            psi(static_cast<Eigen::Index>(b)) *= c - is * pauli_phase(m, b);
        return;
    }
    for (std::uint64_t b = 0; b < dim; ++b) {
        const std::uint64_t partner = b ^ m.flip;
        if (partner < b) continue;
        const complexd vb = psi(static_cast<Eigen::Index>(b));
        const complexd vp = psi(static_cast<Eigen::Index>(partner));
        psi(static_cast<Eigen::Index>(b)) = c * vb - is * pauli_phase(m, partner) * vp;
        psi(static_cast<Eigen::Index>(partner)) = c * vp - is * pauli_phase(m, b) * vb;
    }
}

inline Eigen::VectorXcd apply_pauli_gadget(const PauliTerm& term, double theta, const Eigen::VectorXcd& psi) {
    if ((Eigen::Index{1} << term.n_qubits()) != psi.size())
        throw std::invalid_argument("apply_pauli_gadget: dimension mismatch");
    Eigen::VectorXcd out = psi;
    apply_pauli_gadget_inplace(out, masks_of(term), theta);
    return out;
}

inline Eigen::VectorXcd exact_evolve(const Spectrum& spec, const Eigen::VectorXcd& psi, double t) {
    if (psi.size() != spec.eigenvectors.rows()) throw std::invalid_argument("exact_evolve: dimension mismatch");
    Eigen::VectorXcd amps = spec.eigenvectors.adjoint() * psi;
    for (Eigen::Index j = 0; j < amps.size(); ++j)
        amps(j) *= std::exp(complexd(0.0, -spec.energies(j) * t));
    return spec.eigenvectors * amps;
}

/// First-order product formula: per slice, every term contributes one gadget
/// exp(-i coeff t P / slices), i.e. theta = 2 coeff t / slices, applied in
/// the order the terms appear in the sum.
inline Eigen::VectorXcd trotter_evolve(const PauliSum& h, const Eigen::VectorXcd& psi, double t, long slices) {
    if ((Eigen::Index{1} << h.n_qubits) != psi.size()) throw std::invalid_argument("trotter_evolve: dimension mismatch");
    if (slices < 1) throw std::invalid_argument("trotter_evolve: need at least one slice");
    std::vector<PauliMasks> masks;
    masks.reserve(h.terms.size());
    for (const auto& term : h.terms) masks.push_back(masks_of(term));
    Eigen::VectorXcd out = psi;
    for (long s = 0; s < slices; ++s)
        for (std::size_t j = 0; j < h.terms.size(); ++j)
            apply_pauli_gadget_inplace(out, masks[j], 2.0 * h.terms[j].coefficient * t / static_cast<double>(slices));
    return out;
}

/// A real-time-evolution backend: either exact spectral evolution or a
/// first-order product formula with a fixed slice density.
struct Propagator {
    enum class Kind { ExactSpectral, TrotterFirstOrder };

    Kind kind = Kind::ExactSpectral;
    std::shared_ptr<const Spectrum> spectrum;
    std::shared_ptr<const PauliSum> hamiltonian;
    double slices_per_unit_time = 0.0;

    static Propagator exact(Spectrum s) {
        Propagator p;
        p.kind = Kind::ExactSpectral;
        p.spectrum = std::make_shared<const Spectrum>(std::move(s));
        return p;
    }

    static Propagator trotter(PauliSum h, double slices_per_unit_time) {
        if (!(slices_per_unit_time > 0.0))
            throw std::invalid_argument("Propagator::trotter: slice density must be positive");
        Propagator p;
        p.kind = Kind::TrotterFirstOrder;
        p.hamiltonian = std::make_shared<const PauliSum>(std::move(h));
        p.slices_per_unit_time = slices_per_unit_time;
        return p;
    }

    long slices_for(double t) const {
        return std::max<long>(1, static_cast<long>(std::ceil(std::abs(t) * slices_per_unit_time)));
    }
};

inline Eigen::VectorXcd evolve(const Propagator& prop, const Eigen::VectorXcd& psi, double t) {
    switch (prop.kind) {
        case Propagator::Kind::ExactSpectral: return exact_evolve(*prop.spectrum, psi, t);
        case Propagator::Kind::TrotterFirstOrder: return trotter_evolve(*prop.hamiltonian, psi, t, prop.slices_for(t));
    }
    throw std::logic_error("evolve: unknown propagator kind");
}

// --- Joint-register helpers -------------------------------------------------
//
// A joint state over n system qubits plus one ancilla stores the ancilla as
// the least significant bit: joint(2i) pairs system index i with ancilla |0>,
// joint(2i + 1) with ancilla |1>. The ancilla is "qubit n" in the labeling
// convention.

inline void hadamard_ancilla(Eigen::VectorXcd& joint) {
    constexpr double inv_sqrt2 = 0.7071067811865476;
    for (Eigen::Index i = 0; i < joint.size(); i += 2) {
        const complexd a = joint(i), b = joint(i + 1);
        joint(i) = inv_sqrt2 * (a + b);
        joint(i + 1) = inv_sqrt2 * (a - b);
    }
}

/// Standard R_z on the ancilla: diag(e^{-i angle/2}, e^{+i angle/2}).
inline void ancilla_rz(Eigen::VectorXcd& joint, double angle) {
    const complexd lo = std::exp(complexd(0.0, -0.5 * angle));
    const complexd hi = std::exp(complexd(0.0, +0.5 * angle));
    for (Eigen::Index i = 0; i < joint.size(); i += 2) {
        joint(i) *= lo;
        joint(i + 1) *= hi;
    }
}

/// Phase gate on the ancilla: diag(1, e^{i angle}).
inline void ancilla_phase(Eigen::VectorXcd& joint, double angle) {
    const complexd ph = std::exp(complexd(0.0, angle));
    for (Eigen::Index i = 1; i < joint.size(); i += 2) joint(i) *= ph;
}

namespace detail {

inline std::pair<Eigen::VectorXcd, Eigen::VectorXcd> split_ancilla(const Eigen::VectorXcd& joint) {
    const Eigen::Index dim = joint.size() / 2;
    Eigen::VectorXcd zero(dim), one(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        zero(i) = joint(2 * i);
        one(i) = joint(2 * i + 1);
    }
    return {std::move(zero), std::move(one)};
}

inline void merge_ancilla(Eigen::VectorXcd& joint, const Eigen::VectorXcd& zero, const Eigen::VectorXcd& one) {
    for (Eigen::Index i = 0; i < zero.size(); ++i) {
        joint(2 * i) = zero(i);
        joint(2 * i + 1) = one(i);
    }
}

/// The given Pauli string extended by Z on the ancilla, so the gadget evolves
/// the ancilla-0 branch forward and the ancilla-1 branch backward.
inline PauliTerm extend_with_ancilla_z(const PauliTerm& term) {
    PauliTerm ext = term;
    ext.ops.push_back(Pauli::Z);
    return ext;
}

}  // namespace detail

/// Evolves the ancilla-0 branch by U(t) and the ancilla-1 branch by U(-t).
/// With a product-formula backend this is realized gadget by gadget using the
/// ancilla-extended strings Z (x) P, one gadget per term per slice.
inline void two_sided_evolve(const Propagator& prop, Eigen::VectorXcd& joint, double t) {
    if (joint.size() % 2 != 0) throw std::invalid_argument("two_sided_evolve: joint register has odd dimension");
    if (prop.kind == Propagator::Kind::ExactSpectral) {
        auto [zero, one] = detail::split_ancilla(joint);
        zero = exact_evolve(*prop.spectrum, zero, t);
        one = exact_evolve(*prop.spectrum, one, -t);
        detail::merge_ancilla(joint, zero, one);
        return;
    }
    const PauliSum& h = *prop.hamiltonian;
    if ((joint.size() >> 1) != (Eigen::Index{1} << h.n_qubits))
        throw std::invalid_argument("two_sided_evolve: dimension mismatch");
    const long slices = prop.slices_for(t);
    std::vector<PauliMasks> masks;
    masks.reserve(h.terms.size());
    for (const auto& term : h.terms) masks.push_back(masks_of(detail::extend_with_ancilla_z(term)));
    for (long s = 0; s < slices; ++s)
        for (std::size_t j = 0; j < h.terms.size(); ++j)
            apply_pauli_gadget_inplace(joint, masks[j], 2.0 * h.terms[j].coefficient * t / static_cast<double>(slices));
}

/// Applies U(t) to the ancilla-1 branch, leaving the ancilla-0 branch alone.
inline void controlled_evolve(const Propagator& prop, Eigen::VectorXcd& joint, double t) {
    if (joint.size() % 2 != 0) throw std::invalid_argument("controlled_evolve: joint register has odd dimension");
    auto [zero, one] = detail::split_ancilla(joint);
    one = evolve(prop, one, t);
    detail::merge_ancilla(joint, zero, one);
}

// --- Propagator accuracy ----------------------------------------------------

/// Worst-case operator-norm error of a propagator over a set of times,
/// measured against exact evolution with the target-energy phase removed:
/// err(t) = || U_prop(t) e^{+i e_tilde t} - e^{-i (H - e_tilde) t} ||.
/// The value is independent of e_tilde; it is accepted to keep the error
/// definition aligned with how the propagator enters the circuits.
struct RteErrorReport {
    double eps_rte = 0.0;
    double worst_time = 0.0;
    std::vector<double> times;
    std::vector<double> errors;
};

namespace detail {

inline Eigen::MatrixXcd dense_propagator(const Propagator& prop, double t, Eigen::Index dim) {
    if (prop.kind == Propagator::Kind::ExactSpectral) {
        const Spectrum& s = *prop.spectrum;
        Eigen::VectorXcd phases(s.size());
        for (Eigen::Index j = 0; j < s.size(); ++j) phases(j) = std::exp(complexd(0.0, -s.energies(j) * t));
        return s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
    }
    // One dense slice unitary, then binary exponentiation over the slices.
    const PauliSum& h = *prop.hamiltonian;
    const long slices = prop.slices_for(t);
    Eigen::MatrixXcd slice = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto& term : h.terms) {
        const PauliMasks m = masks_of(term);
        const double theta = 2.0 * term.coefficient * t / static_cast<double>(slices);
        for (Eigen::Index col = 0; col < dim; ++col) {
            Eigen::VectorXcd v = slice.col(col);
            apply_pauli_gadget_inplace(v, m, theta);
            slice.col(col) = v;
        }
    }
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd base = std::move(slice);
    long e = slices;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e > 0) base = base * base;
    }
    return result;
}

}  // namespace detail

inline RteErrorReport measure_rte_error(const PauliSum& h, const Propagator& prop, double e_tilde,
                                        const std::vector<double>& times, int max_qubits = kDefaultDenseCap) {
    if (times.empty()) throw std::invalid_argument("measure_rte_error: no times given");
    const Spectrum spec = diagonalize(h, max_qubits);
    const Eigen::Index dim = spec.eigenvectors.rows();
    RteErrorReport report;
    report.times = times;
    report.errors.reserve(times.size());
    for (double t : times) {
        Eigen::VectorXcd shifted_phases(spec.size());
        for (Eigen::Index j = 0; j < spec.size(); ++j)
            shifted_phases(j) = std::exp(complexd(0.0, -(spec.energies(j) - e_tilde) * t));
        const Eigen::MatrixXcd exact = spec.eigenvectors * shifted_phases.asDiagonal() * spec.eigenvectors.adjoint();
        const Eigen::MatrixXcd actual = detail::dense_propagator(prop, t, dim) * std::exp(complexd(0.0, e_tilde * t));
        const Eigen::MatrixXcd diff = actual - exact;
        const double err = Eigen::JacobiSVD<Eigen::MatrixXcd>(diff).singularValues()(0);
        report.errors.push_back(err);
        if (err >= report.eps_rte) {
            report.eps_rte = err;
            report.worst_time = t;
        }
    }
    return report;
}

}  // namespace qprep
