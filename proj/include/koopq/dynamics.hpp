// dynamics.hpp - measure-preserving test systems (torus rotations, finite
// periodic orbits), band-limited Fourier observables and von Mises densities.
//
// These are the ground-truth models every other module is checked against:
// for a rotation the Koopman group acts diagonally on characters
// γ_j(x) = exp(i j·x), so koopman_exact() is an exact oracle.

#pragma once

#include "koopq/numerics.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace koopq::dynamics {

class TorusPoint {
public:
    TorusPoint() = default;
    explicit TorusPoint(std::vector<double> theta);

    std::size_t dim() const noexcept { return theta_.size(); }
    double operator[](std::size_t i) const { return theta_[i]; }
    const std::vector<double>& angles() const noexcept { return theta_; }

    friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

private:
    std::vector<double> theta_;  // each in [0, 2π)
};

// Φ^t(θ) = θ + tα mod 2π
class RotationSystem {
public:
    explicit RotationSystem(std::vector<double> alpha);

    std::size_t dim() const noexcept { return alpha_.size(); }
    const std::vector<double>& frequencies() const noexcept { return alpha_; }

    TorusPoint flow(const TorusPoint& x, double t) const;

private:
    std::vector<double> alpha_;
};

// Cyclic permutation i -> i+1 mod M with uniform invariant measure. State i is
// identified with the angle 2πi/M on the circle.
class PeriodicOrbitSystem {
public:
    explicit PeriodicOrbitSystem(int states);

    int size() const noexcept { return m_; }
    int step(int i) const noexcept { return (i + 1) % m_; }
    TorusPoint point(int i) const;

    // Matrix of (Uf)(i) = f(i+1) in the orthonormal point basis of L²(μ).
    Eigen::MatrixXcd koopman_matrix() const;

private:
    int m_;
};

// Σ_j c_j γ_j over multi-indices of fixed dimension. Zero coefficients are
// allowed to be absent.
class FourierObservable {
public:
    using Coefficients = std::map<MultiIndex, cplx>;

    explicit FourierObservable(std::size_t dim) : dim_(dim) {}
    FourierObservable(std::size_t dim, Coefficients coeffs);

    static FourierObservable constant(std::size_t dim, cplx c);
    static FourierObservable character(const MultiIndex& j, cplx c = 1.0);
    // cos(θ_axis) on the d-torus
    static FourierObservable cosine(std::size_t dim, std::size_t axis = 0);

    std::size_t dim() const noexcept { return dim_; }
    int bandwidth() const noexcept;
    const Coefficients& coefficients() const noexcept { return coeffs_; }
    cplx coefficient(const MultiIndex& j) const;
    void set(const MultiIndex& j, cplx c);

    // c_{-j} == conj(c_j) for every stored j, to tol
    bool is_real(double tol = 1e-12) const;
    double l2_norm() const;

private:
    std::size_t dim_;
    Coefficients coeffs_;
};

struct VonMisesDensity {
    std::vector<double> mu;     // location, radians
    std::vector<double> kappa;  // concentration, > 0

    std::size_t dim() const noexcept { return mu.size(); }
    double operator()(const TorusPoint& x) const;
};

TorusPoint flow(const RotationSystem& sys, const TorusPoint& x, double t);

cplx evaluate(const FourierObservable& f, const TorusPoint& x);

// Exact Koopman evolution c_j -> exp(i t j·α) c_j.
FourierObservable koopman_exact(const FourierObservable& f, const RotationSystem& sys,
                                double t);

// Fourier coefficients of the product von Mises density truncated to
// |j_i| <= J; coefficient I_{|j_i|}(κ_i)/I_0(κ_i) · exp(-i j_i μ_i) per axis.
FourierObservable von_mises_fourier(const VonMisesDensity& p, int bandwidth);

std::vector<TorusPoint> sample_trajectory(const RotationSystem& sys, const TorusPoint& x0,
                                          double dt, std::size_t count);

// Non-empty when some ratio α_i/α_k lies within tol of a rational with
// denominator <= max_den.
std::optional<std::string> near_rational_warning(const RotationSystem& sys,
                                                 double tol = 1e-9, int max_den = 100);

// `t,theta_0,...,theta_{d-1}`, 17 significant digits.
void write_trajectory_csv(std::ostream& out, const std::vector<TorusPoint>& traj, double dt);

}  // namespace koopq::dynamics
