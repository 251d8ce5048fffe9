// spectral.hpp - regularized Koopman generators on a truncated RKHA basis.
//
// A generator is stored as a skew-Hermitian matrix A over the lattice (ψ_j
// coordinates, which coincide with Fourier coordinates of the L² generator
// under the partial isometry e_j -> ψ_j) together with its unitary
// eigendecomposition A ζ_k = i ω_k ζ_k.

#pragma once

#include "koopq/dynamics.hpp"
#include "koopq/rkha.hpp"

#include <iosfwd>
#include <vector>

namespace koopq::spectral {

using dynamics::FourierObservable;
using dynamics::RotationSystem;
using dynamics::TorusPoint;
using rkha::TruncatedLattice;

enum class GeneratorKind { Analytic, DataDriven };

struct Eigenpair {
    double omega;             // eigenvalue i·omega
    Eigen::VectorXcd vector;  // unit eigenvector over the lattice
    std::size_t anchor;       // lattice position of the largest component
};

class GeneratorSpec {
public:
    GeneratorSpec(TruncatedLattice lat, Eigen::MatrixXcd matrix, std::vector<Eigenpair> modes,
                  GeneratorKind kind);

    const TruncatedLattice& lattice() const noexcept { return lat_; }
    const Eigen::MatrixXcd& matrix() const noexcept { return a_; }
    GeneratorKind kind() const noexcept { return kind_; }

    // Sorted by |ω|, then positive before negative, then anchor position.
    const std::vector<Eigenpair>& modes() const noexcept { return modes_; }

    // ω_j for lattice position k (analytic kind only).
    double frequency_at(std::size_t k) const;

    // exp(tA) applied to a coefficient vector over the lattice.
    Eigen::VectorXcd propagate(const Eigen::VectorXcd& v, double t) const;
    Eigen::MatrixXcd propagator(double t) const;

    // max |A + A^†|
    double skew_defect() const;

private:
    TruncatedLattice lat_;
    Eigen::MatrixXcd a_;
    std::vector<Eigenpair> modes_;
    GeneratorKind kind_;
    Eigen::MatrixXcd basis_;  // columns are modes_[k].vector
    Eigen::VectorXd omegas_;
};

// Diagonal generator with ω_j = j·α and eigenvectors ψ_j.
GeneratorSpec analytic_generator(const RotationSystem& sys, const TruncatedLattice& lat);

// Galerkin estimate from a trajectory sampled every dt: Gram and
// central-difference matrices from ergodic averages, A = G^{-1} D, then
// antisymmetrisation, reality symmetrisation and deflation of the constant.
GeneratorSpec data_driven_generator(const std::vector<TorusPoint>& samples, double dt,
                                    const TruncatedLattice& lat);

// Koopman evolution of an observable supported on the lattice; throws
// OutOfLatticeError otherwise.
FourierObservable evolve(const GeneratorSpec& gen, const FourierObservable& f, double t);

// ||K_τ^* e^{tW} K_τ f - G_{τ/2} e^{tV} G_{τ/2} f||, both sides assembled
// independently from the smoothers.
double smoothing_residual(const rkha::SubexpWeight& w, const GeneratorSpec& gen,
                       const FourierObservable& f, double t);

// `index,omega,abs_error_vs_analytic` with one row per mode of `gen`; the
// analytic reference is matched by anchor index.
void write_frequency_csv(std::ostream& out, const GeneratorSpec& gen,
                         const GeneratorSpec& analytic);

}  // namespace koopq::spectral
