// fock.hpp - truncated weighted symmetric Fock space over generator eigenmodes.
//
// A FockVector is stored in the unnormalised monomial basis
//   ζ^{occ} = ζ_{k_1} ∨ ... ∨ ζ_{k_n},   occ = (n_0, ..., n_{M-1}),  n = Σ n_k,
// over M orthonormal eigenmodes ζ_k of a regularised generator (mode 0 is the
// constant). Under the weighted inner product
//   ‖ζ^{occ}‖² = w²(n) Π n_k! / n!
// and distinct occupations are orthogonal. In this basis the symmetric
// product simply adds occupations.

#pragma once

#include "koopq/dynamics.hpp"
#include "koopq/spectral.hpp"

#include <map>
#include <vector>

namespace koopq::fock {

using Occupation = std::vector<int>;

// w(n) = exp(σ_w n^{p_w}), w(0) = 1, with grading cutoff Nmax.
class FockWeight {
public:
    explicit FockWeight(double sigma_w = 2.0, double p_w = 0.75, int nmax = 6);

    double sigma() const noexcept { return sigma_; }
    double exponent() const noexcept { return p_; }
    int nmax() const noexcept { return nmax_; }

    double operator()(int n) const;
    double inv_sq(int n) const;  // w^{-2}(n)
    // Σ_{n > Nmax} w^{-2}(n), summed until terms drop below 1e-300.
    double tail_inv_sq() const;
    // Σ_{n > Nmax} w^{-1}(n) r^n for r <= 1.
    double tail_series(double r) const;

private:
    double sigma_;
    double p_;
    int nmax_;
};

int grading(const Occupation& occ);

// All occupations of `modes` modes with total grading n, lexicographically
// descending in (n_0, n_1, ...).
std::vector<Occupation> occupations(std::size_t modes, int n);

double occupation_norm_sq(const FockWeight& w, const Occupation& occ);

class FockVector {
public:
    using Terms = std::map<Occupation, cplx>;

    explicit FockVector(std::size_t modes) : modes_(modes) {}

    static FockVector vacuum(std::size_t modes, cplx c = 1.0);
    static FockVector mode(std::size_t modes, std::size_t k, cplx c = 1.0);
    static FockVector monomial(const Occupation& occ, cplx c = 1.0);

    std::size_t modes() const noexcept { return modes_; }
    const Terms& terms() const noexcept { return terms_; }
    cplx amplitude(const Occupation& occ) const;
    int max_grading() const;

    void add(const Occupation& occ, cplx c);
    FockVector& operator+=(const FockVector& o);
    FockVector& operator*=(cplx c);
    friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
    friend FockVector operator-(FockVector a, const FockVector& b) { return a += (FockVector(b) *= -1.0); }
    friend FockVector operator*(cplx c, FockVector a) { return a *= c; }

    // Terms of one grading only.
    FockVector grading_part(int n) const;

private:
    std::size_t modes_;
    Terms terms_;
};

// Conjugate-linear in u. Throws DomainError if a grading exceeds Nmax.
cplx fock_inner(const FockWeight& w, const FockVector& u, const FockVector& v);
double fock_norm(const FockWeight& w, const FockVector& u);

struct Truncated {
    FockVector value;
    double discarded_norm_sq;  // squared Fock norm of terms above Nmax
};

// u ∨ v, truncated at Nmax.
Truncated sym_product(const FockWeight& w, const FockVector& u, const FockVector& v);

// η^{∨m} for η = Σ_k c_k ζ_k: coefficients m!/Π n_k! Π c_k^{n_k}.
FockVector symmetric_power(const Eigen::VectorXcd& c, int m);

// The first M eigenmodes of a generator (in its sorted order) with their
// frequencies and lattice coordinates.
struct ModeSet {
    std::vector<double> omega;
    Eigen::MatrixXcd vectors;  // lattice size × M, columns ζ_k in ψ coordinates

    std::size_t size() const noexcept { return omega.size(); }
    static ModeSet from_generator(const spectral::GeneratorSpec& gen, std::size_t m);
    // ⟨ζ_k, u⟩ for a lattice coefficient vector u.
    Eigen::VectorXcd coordinates(const Eigen::VectorXcd& u) const;
};

// Diagonal action i Σ_k n_k ω_k on every occupation.
FockVector lifted_generator_apply(const ModeSet& modes, const FockVector& v);
// Phases exp(i t Σ_k n_k ω_k).
FockVector lifted_evolve(const ModeSet& modes, const FockVector& v, double t);

// Point of a spectrum torus: η = Σ_k a_k z_k ζ_k with |z_k| = 1, ‖a‖ <= 1.
struct SpectrumTorusPoint {
    Eigen::VectorXd a;
    Eigen::VectorXcd z;

    static SpectrumTorusPoint from_coordinates(const Eigen::VectorXcd& c);
    Eigen::VectorXcd coordinates() const;  // a_k z_k
};

void validate(const SpectrumTorusPoint& pt);

// z_k -> exp(-i ω_k t) z_k
SpectrumTorusPoint spectrum_rotate(const SpectrumTorusPoint& pt, const ModeSet& modes, double t);

struct XiSeries {
    FockVector xi;      // Σ_{n<=Nmax} w^{-2}(n) η^{∨n}
    double tail_bound;  // Σ_{n>Nmax} w^{-1}(n) ‖η‖^n
};
XiSeries xi_series(const FockWeight& w, const SpectrumTorusPoint& pt);

// χ_{a,z}(v) = ⟨ξ_{a,z}, v⟩ with the truncated series.
cplx gelfand_eval(const FockWeight& w, const SpectrumTorusPoint& pt, const FockVector& v);

struct ForecastParams {
    int m = 1;                  // Fock grading of the kernel lift
    double sigma = 0.2;         // feature-map regularity
    double tau = 0.1;           // RKHA regularity, tau <= sigma/2
    double p = 0.5;             // weight exponent
    double kernel_kappa = 1.0;  // κ(x,y) = exp(kernel_kappa (cos(x-y) - 1))
    std::size_t modes = 7;      // M
    std::size_t grid = 64;      // quadrature nodes
    FockWeight weight{};
};

struct ForecastResult {
    double value;
    double truncation_mass;  // ξ-series tail bound at the feature point
    cplx g;                  // ĝ^{(t)} at the feature point
    cplx h;                  // ĥ^{(t)} at the feature point
};

// ĝ^{(t)}/ĥ^{(t)} at the feature point of x on the circle, with the lift
// 𝒦̂_{m,τ} assembled by quadrature and evolved by lifted_evolve. Throws
// DegeneracyError if |ĥ^{(t)}| < 1e-8.
ForecastResult second_quantization_forecast(const dynamics::FourierObservable& f,
                                            const spectral::GeneratorSpec& gen,
                                            const ForecastParams& params,
                                            const dynamics::TorusPoint& x, double t);

struct TensorNetworkParams {
    int n = 1;            // tensor order, 1..3
    double sigma = 0.0;   // smoothing K_σ, σ >= 0
    double p = 0.5;       // weight exponent of K_σ
    double kappa = 10.0;  // von Mises concentration of the state
    std::size_t grid = 0; // quadrature nodes; 0 picks 4nJ + 8
};

struct TensorNetworkResult {
    double value;
    double truncation_bound;  // bound on the effect of the lattice cutoff
};

// Normalised expectation of A_{f,σ,τ,n} in the state built from
// (ξ^{1/n})^{⊗n}, ξ the von Mises density at x, each factor evolved by the
// transfer group of `gen`. The product structure collapses the tensor to
// the pointwise power s^n with s = G_{σ/2} P^t p_{x, κ/n}.
TensorNetworkResult tensor_network_expectation(const dynamics::FourierObservable& f,
                                               const spectral::GeneratorSpec& gen,
                                               const dynamics::TorusPoint& x,
                                               const TensorNetworkParams& params, double t);

}  // namespace koopq::fock
