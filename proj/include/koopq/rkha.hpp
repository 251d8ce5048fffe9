// rkha.hpp - reproducing kernel Hilbert algebras on the d-torus built from
// subexponential weights λ_τ(j) = Π_i exp(-τ|j_i|^p).
//
// Everything lives in coefficient space over a TruncatedLattice
// {j ∈ Z^d : |j_i| <= J}. Conventions:
//   * an L² function is stored by its Fourier coefficients c_j (basis γ_j);
//   * an RKHA element is stored by its coordinates b_j in the orthonormal
//     basis ψ_j = sqrt(λ(j)) γ_j.
// With these, K_τ maps e_j to sqrt(λ_τ(j)) ψ_j, K_τ^* maps ψ_j to
// sqrt(λ_τ(j)) e_j, and G_τ = K_τ^* K_τ multiplies c_j by λ_τ(j).

#pragma once

#include "koopq/dynamics.hpp"
#include "koopq/numerics.hpp"

#include <functional>
#include <tuple>
#include <vector>

namespace koopq::rkha {

using dynamics::FourierObservable;
using dynamics::TorusPoint;

class SubexpWeight {
public:
    SubexpWeight(double tau, double p, std::size_t dim);

    double tau() const noexcept { return tau_; }
    double exponent() const noexcept { return p_; }
    std::size_t dim() const noexcept { return dim_; }

    double operator()(const MultiIndex& j) const;
    // -ln λ(j), exact for large |j| where λ underflows
    double neg_log(const MultiIndex& j) const;

private:
    double tau_;
    double p_;
    std::size_t dim_;
};

// Any strictly positive (or test-injected) weight on Z^d.
using WeightFn = std::function<double(const MultiIndex&)>;

// All j with |j_i| <= J, enumerated lexicographically in (j_1, ..., j_d).
class TruncatedLattice {
public:
    TruncatedLattice(std::size_t dim, int bandwidth);

    std::size_t dim() const noexcept { return dim_; }
    int bandwidth() const noexcept { return bandwidth_; }
    std::size_t size() const noexcept { return points_.size(); }

    const MultiIndex& operator[](std::size_t k) const { return points_[k]; }
    const std::vector<MultiIndex>& points() const noexcept { return points_; }

    bool contains(const MultiIndex& j) const noexcept;
    // Position in the enumeration; throws OutOfLatticeError.
    std::size_t index_of(const MultiIndex& j) const;
    std::size_t zero_index() const { return index_of(MultiIndex(dim_, 0)); }

    // Dense Fourier-coefficient vector over the lattice; throws
    // OutOfLatticeError if f has support outside it.
    Eigen::VectorXcd to_vector(const FourierObservable& f) const;
    FourierObservable from_vector(const Eigen::VectorXcd& v) const;

private:
    std::size_t dim_;
    int bandwidth_;
    std::vector<MultiIndex> points_;
};

double weight(const SubexpWeight& w, const MultiIndex& j);

// Truncated Mercer series Σ_j λ(j) conj(γ_j(x)) γ_j(y).
cplx kernel_eval(const SubexpWeight& w, const TruncatedLattice& lat, const TorusPoint& x,
                 const TorusPoint& y);

// (λ*λ)(j) restricted to pairs inside the lattice.
double truncated_self_convolution(const WeightFn& w, const TruncatedLattice& lat,
                                  const MultiIndex& j);

// max_{j ∈ lat} (λ*λ)(j) / λ(j)
double subconvolutivity_constant(const WeightFn& w, const TruncatedLattice& lat);
double subconvolutivity_constant(const SubexpWeight& w, const TruncatedLattice& lat);

// λ(nγ)^{1/n} for n = 1..nmax.
std::vector<double> grs_check(const SubexpWeight& w, const MultiIndex& gamma, int nmax);

struct BdCheck {
    double partial_sum;  // Σ_{n<=nmax} ln(1/λ(nγ)) / n²
    double tail_bound;   // upper bound on the remainder Σ_{n>nmax}
};
BdCheck bd_check(const SubexpWeight& w, const MultiIndex& gamma, long nmax = 100000);

struct ComultTerm {
    MultiIndex alpha;
    MultiIndex beta;
    double coeff;  // sqrt(λ(α)λ(β)/λ(γ))
};

// Δψ_γ = Σ_{α+β=γ} coeff ψ_α ⊗ ψ_β, pairs restricted to the lattice; ordered
// by α in lattice enumeration.
std::vector<ComultTerm> comult_coeffs(const SubexpWeight& w, const MultiIndex& gamma,
                                      const TruncatedLattice& lat);

// Coordinates of the kernel section k_x in the ψ basis: sqrt(λ(j)) e^{-i j·x}.
Eigen::VectorXcd feature_coeffs(const SubexpWeight& w, const TruncatedLattice& lat,
                                const TorusPoint& x);

// ϖ = sup_x ||k_x|| = sqrt(Σ_j λ(j)) over the lattice.
double feature_norm_bound(const SubexpWeight& w, const TruncatedLattice& lat);

enum class SmootherRole { K, K_adjoint, G };

// Diagonal kernel operators. apply() reads/writes coefficients according to
// the role: K takes Fourier coefficients to ψ coordinates, K_adjoint takes ψ
// coordinates to Fourier coefficients, G maps Fourier to Fourier.
class DiagonalSmoother {
public:
    DiagonalSmoother(SubexpWeight w, SmootherRole role) : w_(w), role_(role) {}

    const SubexpWeight& weight() const noexcept { return w_; }
    SmootherRole role() const noexcept { return role_; }

    double multiplier(const MultiIndex& j) const;
    FourierObservable apply(const FourierObservable& f) const;
    Eigen::VectorXcd apply(const TruncatedLattice& lat, const Eigen::VectorXcd& v) const;

private:
    SubexpWeight w_;
    SmootherRole role_;
};

inline FourierObservable apply_smoother(const DiagonalSmoother& op, const FourierObservable& f) {
    return op.apply(f);
}

// Tail estimate e^{-τ J^p} reported alongside truncated sums.
double truncation_tail_estimate(const SubexpWeight& w, int bandwidth);

}  // namespace koopq::rkha
