// qcirc.hpp - simulated quantum circuit for rotations with pure point spectrum.
//
// Each frequency index j_i ∈ J_q = {-2^q..-1, 1..2^q} is stored in q+1 qubits
// via ĵ = j + 2^q (j < 0) or j + 2^q - 1 (j > 0). Qubit 0 is the most
// significant bit of dimension 1 and dimensions are concatenated, so the
// computational basis index is b = Σ_i bit_i 2^{n-1-i}.
//
// Because j·α is affine in the bits, the diagonal generator is a sum of
// single-qubit Z terms and its exponential factorises into n phase gates.

#pragma once

#include "koopq/dynamics.hpp"
#include "koopq/rkha.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace koopq::qcirc {

using Statevector = Eigen::VectorXcd;

class QubitEncoding {
public:
    QubitEncoding(std::size_t dim, int resolution);

    std::size_t dim() const noexcept { return d_; }
    int resolution() const noexcept { return q_; }
    std::size_t qubits() const noexcept { return d_ * static_cast<std::size_t>(q_ + 1); }
    std::uint64_t size() const noexcept { return std::uint64_t{1} << qubits(); }

    // Basis index of j; throws DomainError if some j_i is 0 or out of range.
    std::uint64_t encode(const MultiIndex& j) const;
    MultiIndex decode(std::uint64_t b) const;
    // "b_0 b_1 ... b_{n-1}" without separators.
    std::string bits(std::uint64_t b) const;

private:
    std::size_t d_;
    int q_;
};

// Entry b is decode(b)·α.
Eigen::VectorXd frequency_vector(const QubitEncoding& enc, const dynamics::RotationSystem& sys);

struct WalshCoefficients {
    Eigen::VectorXcd v;  // i · (weight-one Walsh coefficient), qubit 0 first
};

struct WalshSpectrum {
    Eigen::VectorXd coeffs;  // normalised transform, index = bit mask
    double max_nonaffine;    // largest |coefficient| of weight 0 or >= 2
};

// Normalised fast Walsh-Hadamard transform, ŵ_s = 2^{-n} Σ_b (-1)^{|s∧b|} f_b.
// Masks use the basis-index bit layout, so qubit i is mask 1 << (n-1-i).
WalshSpectrum walsh_spectrum(const Eigen::VectorXd& freqs);

// Throws NotAffineError if a weight-0 or weight->=2 coefficient exceeds
// 1e-10·max|ω|.
WalshCoefficients walsh_coefficients(const Eigen::VectorXd& freqs);

// Σ_i v_i Z_i evaluated on every basis state.
Eigen::VectorXcd reconstruct_diagonal(const WalshCoefficients& c);

// ⊗_i exp(t v_i Z_i) ψ, one pass per qubit. `threads` > 1 splits the
// amplitude range into blocks.
Statevector evolve_statevector(const WalshCoefficients& c, const Statevector& psi, double t,
                               unsigned threads = 1);

// sqrt(λ(j)) e^{-i j·x} over J_q^d, before normalisation.
Statevector feature_amplitudes(const QubitEncoding& enc, const rkha::SubexpWeight& w,
                               const dynamics::TorusPoint& x);
Statevector feature_state(const QubitEncoding& enc, const rkha::SubexpWeight& w,
                          const dynamics::TorusPoint& x);

// S_f = (A + A^†)/2 with A_ab = f̂(i - j) sqrt(λ(j)/λ(i)), i = decode(a),
// j = decode(b). Throws DomainError for non-real f.
Eigen::MatrixXcd projected_observable(const QubitEncoding& enc, const rkha::SubexpWeight& w,
                                      const dynamics::FourierObservable& f);

// ⟨ψ(t)| S_f |ψ(t)⟩ with ψ(t) = Û^{-t} Ξ̂(x), which tracks f(Φ^t x).
double circuit_expectation(const QubitEncoding& enc, const rkha::SubexpWeight& w,
                           const dynamics::RotationSystem& sys,
                           const dynamics::FourierObservable& f, const dynamics::TorusPoint& x,
                           double t);

// Sample mean of `shots` projective measurements of a Hermitian observable.
double sampled_expectation(const Eigen::MatrixXcd& obs, const Statevector& psi, std::size_t shots,
                           std::uint64_t seed);

// Text listing: header, optional state-preparation amplitudes, one
// `rz(theta) q[i];` line per qubit with theta = -2 t Im(v_i), and the
// measurement stage.
std::string export_circuit(const WalshCoefficients& c, const QubitEncoding& enc, double t,
                           const Statevector* prep = nullptr);

// Rotation angles read back from export_circuit text, qubit order.
std::vector<double> parse_rotation_angles(const std::string& text);

// Applies rz(theta_i) = exp(-i theta_i Z / 2) on every qubit.
Statevector apply_rotations(const std::vector<double>& angles, const Statevector& psi);

// `q,t,value,exact,abs_error`
void write_expectation_csv_header(std::ostream& out);

}  // namespace koopq::qcirc
