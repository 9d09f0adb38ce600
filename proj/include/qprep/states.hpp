#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "qprep/pauli.hpp"

namespace qprep {

/// Index of a computational basis state; qubit 0 is the leftmost character
/// and the most significant bit.
inline std::uint64_t bitstring_index(const std::string& bits) {
    if (bits.empty() || bits.size() > 63) throw std::invalid_argument("bitstring must have 1..63 characters");
    std::uint64_t idx = 0;
    for (char c : bits) {
        if (c != '0' && c != '1')
            throw std::invalid_argument(std::string("invalid bitstring character '") + c + "'");
        idx = (idx << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return idx;
}

inline Eigen::VectorXcd basis_state(const std::string& bits) {
    const auto idx = bitstring_index(bits);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << bits.size());
    psi(static_cast<Eigen::Index>(idx)) = 1.0;
    return psi;
}

inline Eigen::VectorXcd random_statevector(int n_qubits, std::mt19937_64& rng) {
    if (n_qubits < 1 || n_qubits > 30) throw std::invalid_argument("random_statevector: bad qubit count");
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) psi(i) = complexd(gauss(rng), gauss(rng));
    psi.normalize();
    return psi;
}

inline void require_normalized(const Eigen::VectorXcd& psi, double tol = 1e-10) {
    const double err = std::abs(psi.squaredNorm() - 1.0);
    if (err > tol)
        throw std::invalid_argument("state is not normalized (|norm^2 - 1| = " + std::to_string(err) + ")");
}

}  // namespace qprep
