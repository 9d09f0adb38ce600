#pragma once

#include <bit>
#include <charconv>
#include <complex>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

// Qubit labeling convention used throughout this library: qubit 0 is the
// leftmost character of a bitstring and the most significant bit of a
// basis-state index. On an n-qubit register, qubit j owns bit (n-1-j).

namespace qprep {

using complexd = std::complex<double>;

enum class Pauli : std::uint8_t { I = 0, X, Y, Z };

inline char to_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    return '?';
}

inline Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
        default: break;
    }
    throw std::invalid_argument(std::string("invalid Pauli letter '") + c + "'");
}

/// One weighted Pauli string; ops[j] acts on qubit j and the coefficient is
/// real (each string is Hermitian on its own).
struct PauliTerm {
    double coefficient = 0.0;
    std::vector<Pauli> ops;

    int n_qubits() const { return static_cast<int>(ops.size()); }

    bool is_identity() const {
        for (Pauli p : ops)
            if (p != Pauli::I) return false;
        return true;
    }
};

/// Weighted sum of Pauli strings on a fixed register.
struct PauliSum {
    int n_qubits = 0;
    std::vector<PauliTerm> terms;

    std::size_t term_count() const { return terms.size(); }
};

/// Bitmask view of a Pauli string: flip marks X/Y qubits, phase marks Y/Z
/// qubits. P|b> = i^y_count * (-1)^popcount(b & phase) |b ^ flip>.
struct PauliMasks {
    std::uint64_t flip = 0;
    std::uint64_t phase = 0;
    int y_count = 0;
};

inline PauliMasks masks_of(const PauliTerm& term) {
    const int n = term.n_qubits();
    PauliMasks m;
    for (int j = 0; j < n; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << (n - 1 - j);
        switch (term.ops[j]) {
            case Pauli::I: break;
            case Pauli::X: m.flip |= bit; break;
            case Pauli::Y:
                m.flip |= bit;
                m.phase |= bit;
                ++m.y_count;
                break;
            case Pauli::Z: m.phase |= bit; break;
        }
    }
    return m;
}

inline complexd pauli_phase(const PauliMasks& m, std::uint64_t basis_index) {
    static constexpr complexd i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    complexd ph = i_pow[m.y_count & 3];
    if (std::popcount(basis_index & m.phase) & 1) ph = -ph;
    return ph;
}

namespace detail {

inline bool parse_real(const std::string& token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

}  // namespace detail

/// Parses the line-oriented Hamiltonian text format. Each non-comment line is
/// `<coefficient> <op><qubit> ...` (e.g. `0.5 X0 Z2`); a bare coefficient is
/// an identity term. `#` starts a comment, and an optional `qubits: <n>`
/// header fixes the register size (otherwise it is inferred from the largest
/// index used).
inline PauliSum parse_pauli_sum(const std::string& text) {
    struct RawTerm {
        double coefficient;
        std::vector<std::pair<int, Pauli>> ops;
    };
    std::vector<RawTerm> raw;
    int declared_qubits = -1;
    int max_index = -1;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) continue;

        if (token.rfind("qubits:", 0) == 0) {
            std::string count = token.substr(7);  // allow both "qubits: 4" and "qubits:4"
            if (count.empty() && !(ls >> count))
                throw std::invalid_argument("line " + std::to_string(line_no) + ": malformed qubits header");
            double asreal = 0.0;
            if (!detail::parse_real(count, asreal) || asreal < 1 || asreal != static_cast<int>(asreal))
                throw std::invalid_argument("line " + std::to_string(line_no) + ": invalid qubit count '" + count +
                                            "'");
            declared_qubits = static_cast<int>(asreal);
            continue;
        }

        RawTerm term;
        if (!detail::parse_real(token, term.coefficient))
            throw std::invalid_argument("line " + std::to_string(line_no) + ": coefficient '" + token +
                                        "' is not a real number");
        std::set<int> seen;
        while (ls >> token) {
            Pauli p;
            try {
                p = pauli_from_char(token[0]);
            } catch (const std::invalid_argument&) {
                throw std::invalid_argument("line " + std::to_string(line_no) + ": " + "invalid operator '" + token +
                                            "'");
            }
            double idx_real = 0.0;
            if (token.size() < 2 || !detail::parse_real(token.substr(1), idx_real) || idx_real < 0 ||
                idx_real != static_cast<int>(idx_real))
                throw std::invalid_argument("line " + std::to_string(line_no) + ": invalid operator '" + token + "'");
            const int q = static_cast<int>(idx_real);
            if (!seen.insert(q).second)
                throw std::invalid_argument("line " + std::to_string(line_no) + ": duplicate qubit index " +
                                            std::to_string(q));
            if (p != Pauli::I) term.ops.emplace_back(q, p);
            max_index = std::max(max_index, q);
        }
        raw.push_back(std::move(term));
    }

    if (raw.empty()) throw std::invalid_argument("no Hamiltonian terms found");
    int n = declared_qubits > 0 ? declared_qubits : max_index + 1;
    if (n < 1) n = 1;  // identity-only sums still need a register
    if (declared_qubits > 0 && max_index >= declared_qubits)
        throw std::invalid_argument("qubit index " + std::to_string(max_index) + " outside declared register of " +
                                    std::to_string(declared_qubits));

    PauliSum sum;
    sum.n_qubits = n;
    sum.terms.reserve(raw.size());
    for (const auto& r : raw) {
        PauliTerm t;
        t.coefficient = r.coefficient;
        t.ops.assign(n, Pauli::I);
        for (auto [q, p] : r.ops) t.ops[q] = p;
        sum.terms.push_back(std::move(t));
    }
    return sum;
}

inline std::string to_text(const PauliSum& h) {
    std::ostringstream out;
    out.precision(17);
    out << "qubits: " << h.n_qubits << "\n";
    for (const auto& term : h.terms) {
        out << term.coefficient;
        for (int j = 0; j < term.n_qubits(); ++j)
            if (term.ops[j] != Pauli::I) out << ' ' << to_char(term.ops[j]) << j;
        out << "\n";
    }
    return out.str();
}

constexpr int kDefaultDenseCap = 14;

/// Dense matrix realization, sum over terms of coefficient times the term's
/// Kronecker-product string.
inline Eigen::MatrixXcd to_dense(const PauliSum& h, int max_qubits = kDefaultDenseCap) {
    if (h.n_qubits > max_qubits)
        throw std::invalid_argument("register of " + std::to_string(h.n_qubits) +
                                    " qubits exceeds dense cap of " + std::to_string(max_qubits));
    const std::uint64_t dim = std::uint64_t{1} << h.n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& term : h.terms) {
        const PauliMasks masks = masks_of(term);
        for (std::uint64_t b = 0; b < dim; ++b)
            m(static_cast<Eigen::Index>(b ^ masks.flip), static_cast<Eigen::Index>(b)) +=
                term.coefficient * pauli_phase(masks, b);
    }
    return m;
}

inline double hermiticity_error(const Eigen::MatrixXcd& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Linear interpolation (1-alpha)*a + alpha*b as a term-list union.
/// Zero-coefficient contributions are dropped, so alpha = 0 and alpha = 1
/// return the respective operand's term list exactly.
inline PauliSum morph(const PauliSum& h_init, const PauliSum& h, double alpha) {
    if (h_init.n_qubits != h.n_qubits)
        throw std::invalid_argument("morph: register mismatch (" + std::to_string(h_init.n_qubits) + " vs " +
                                    std::to_string(h.n_qubits) + ")");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("morph: alpha " + std::to_string(alpha) + " outside [0, 1]");
    PauliSum out;
    out.n_qubits = h.n_qubits;
    for (const auto& t : h_init.terms) {
        if ((1.0 - alpha) * t.coefficient == 0.0) continue;
        PauliTerm scaled = t;
        scaled.coefficient *= (1.0 - alpha);
        out.terms.push_back(std::move(scaled));
    }
    for (const auto& t : h.terms) {
        if (alpha * t.coefficient == 0.0) continue;
        PauliTerm scaled = t;
        scaled.coefficient *= alpha;
        out.terms.push_back(std::move(scaled));
    }
    if (out.terms.empty()) {
        PauliTerm zero;
        zero.coefficient = 0.0;
        zero.ops.assign(out.n_qubits, Pauli::I);
        out.terms.push_back(std::move(zero));
    }
    return out;
}

/// Diagonal single-qubit-Z Hamiltonian with the given computational basis
/// state as its unique ground state: gap * sum_j (2 b_j - 1) Z_j. The energy
/// gap of this construction is 2*gap (one spin flip), which is reported in
/// measured_gap; drivers that need the true gap must read it from there
/// rather than from the nominal coefficient.
struct HInit {
    PauliSum hamiltonian;
    double nominal_gap = 0.0;
    double measured_gap = 0.0;
};

inline HInit build_h_init(const std::string& bitstring, double gap) {
    if (bitstring.empty()) throw std::invalid_argument("build_h_init: empty bitstring");
    if (!(gap > 0.0)) throw std::invalid_argument("build_h_init: gap must be positive");
    const int n = static_cast<int>(bitstring.size());
    HInit out;
    out.nominal_gap = gap;
    out.measured_gap = 2.0 * gap;
    out.hamiltonian.n_qubits = n;
    for (int j = 0; j < n; ++j) {
        const char c = bitstring[j];
        if (c != '0' && c != '1')
            throw std::invalid_argument(std::string("build_h_init: invalid bitstring character '") + c + "'");
        PauliTerm t;
        t.coefficient = gap * (c == '1' ? 1.0 : -1.0);
        t.ops.assign(n, Pauli::I);
        t.ops[j] = Pauli::Z;
        out.hamiltonian.terms.push_back(std::move(t));
    }
    return out;
}

}  // namespace qprep
