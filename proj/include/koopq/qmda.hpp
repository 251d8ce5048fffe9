// qmda.hpp - classical Bayesian filtering and its density-operator analogue.
//
// Densities live on a uniform circle grid x_i = 2πi/N + offset with the
// uniform measure μ = 1/N. For a PeriodicOrbitSystem the grid is the orbit
// itself (N = M, offset 0); for a circle rotation the grid co-moves with the
// flow, so forecasting only shifts the offset and is exact.
//
// Quantum states are matrices in one of two orthonormal bases of L²(μ):
//   point basis    e_i = sqrt(N) δ_i
//   Fourier basis  φ_j(x) = e^{ijx}, ordered 0, -1, 1, -2, 2, ...
// The transfer operator P = U^* evolves states as ρ -> P ρ P^†.

#pragma once

#include "koopq/dynamics.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace koopq::qmda {

using dynamics::PeriodicOrbitSystem;
using dynamics::RotationSystem;
using dynamics::TorusPoint;

using DensityOperator = Eigen::MatrixXcd;
using Effect = Eigen::MatrixXcd;

struct ClassicalDensity {
    Eigen::VectorXd values;  // σ(x_i), mean 1
    double offset = 0.0;     // grid rotation

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
    double node(std::size_t i) const;

    static ClassicalDensity uniform(std::size_t n, double offset = 0.0);
    // Normalises arbitrary nonnegative weights to a density.
    static ClassicalDensity from_weights(Eigen::VectorXd w, double offset = 0.0);
};

// Throws DomainError unless σ >= 0 and mean(σ) = 1 within tol.
void validate(const ClassicalDensity& sigma, double tol = 1e-10);
bool is_density_operator(const Eigen::MatrixXcd& rho);
bool is_effect(const Eigen::MatrixXcd& e);

// Rank-one projector onto sqrt(σ) in the point basis.
DensityOperator gamma_embed(const ClassicalDensity& sigma);

// (Pσ)(i) = σ(i-1) on the orbit; offset shift by α·dt for a rotation.
ClassicalDensity classical_forecast(const PeriodicOrbitSystem& sys, const ClassicalDensity& sigma);
ClassicalDensity classical_forecast(const RotationSystem& sys, const ClassicalDensity& sigma,
                                    double dt);

struct Posterior {
    ClassicalDensity density;
    double evidence;  // ∫ σ̃ ℓ dμ
};
// Throws ZeroEvidenceError when the evidence is at or below 1e-14.
Posterior classical_analysis(const ClassicalDensity& sigma, const Eigen::VectorXd& likelihood);

// Transfer operator P = U^† of the orbit in the point basis.
Eigen::MatrixXcd transfer_matrix(const PeriodicOrbitSystem& sys);

// U ρ U^†. Throws DomainError if U is not unitary to 1e-10.
DensityOperator quantum_forecast(const Eigen::MatrixXcd& u, const DensityOperator& rho);

struct QuantumPosterior {
    DensityOperator state;
    double evidence;  // tr(ρ e)
};
QuantumPosterior quantum_analysis(const DensityOperator& rho, const Effect& e);

// tr(ρ A), real part.
double expectation(const DensityOperator& rho, const Eigen::MatrixXcd& a);

// Multiplication by f in the point basis.
Eigen::MatrixXcd multiplication_operator(const Eigen::VectorXd& f);

// 0, -1, 1, -2, 2, ... ; the first n frequencies.
std::vector<int> fourier_order(std::size_t n);

// F(i,k) = ⟨e_i, φ_{freqs[k]}⟩ on the grid of sigma-style nodes.
Eigen::MatrixXcd fourier_change_of_basis(std::size_t n, double offset,
                                         const std::vector<int>& freqs);

// ⟨φ_a, f φ_b⟩ = f̂(a-b) for a Fourier observable f on the circle.
Eigen::MatrixXcd toeplitz_multiplication(const dynamics::FourierObservable& f,
                                         const std::vector<int>& freqs);

// Top-left L×L block.
Eigen::MatrixXcd compress(const Eigen::MatrixXcd& a, std::size_t l);
// compress() followed by renormalisation to unit trace.
DensityOperator compress_state(const DensityOperator& rho, std::size_t l);

// Observation model y = h(x) + noise with likelihood kernel κ(y, y').
struct ObservationModel {
    enum class Kernel { Gaussian, Event, Uninformative };

    Kernel kernel = Kernel::Gaussian;
    double epsilon = 0.5;   // Gaussian bandwidth: κ = exp(-|y-y'|²/ε²)
    double delta = 0.5;     // event resolution: κ = 1{|y-y'| <= δ/2}
    double noise_sd = 0.0;  // additive Gaussian observation noise
    // Default h(θ) = (cos θ_0, sin θ_0, cos θ_1, sin θ_1, ...).
    std::function<std::vector<double>(const TorusPoint&)> h;

    std::vector<double> observe(const TorusPoint& x) const;
    double kappa(const std::vector<double>& y, const std::vector<double>& yp) const;
};

// κ(y, h(x_i)) at every grid node.
Eigen::VectorXd likelihood(const ObservationModel& model, const std::vector<double>& y,
                           const ClassicalDensity& grid);

enum class EffectBasis { Point, Fourier };

// Multiplication by x -> κ(y, h(x)) in the point basis (diagonal) or in the
// Fourier basis over `freqs` (Toeplitz, from the grid quadrature).
Effect effect_from_observation(const ObservationModel& model, const std::vector<double>& y,
                               const ClassicalDensity& grid, EffectBasis basis,
                               const std::vector<int>& freqs = {});

enum class FilterMode { Classical, Quantum, QuantumProjected };
std::string to_string(FilterMode m);

struct FilterOptions {
    FilterMode mode = FilterMode::Quantum;
    std::size_t rank = 0;    // L for the projected mode
    int steps = 20;
    std::size_t grid = 256;  // quadrature nodes for rotations
    std::uint64_t seed = 0;
    std::optional<ClassicalDensity> prior;  // default uniform
    // Supplied observations y_1..y_steps; generated from the model if empty.
    std::vector<std::vector<double>> observations;
};

struct FilterStep {
    long step;
    double evidence;
    double consistency;     // ‖Γ(σ_n) - ρ_n‖_1; 0 in classical mode
    double estimate_error;  // angular distance of the estimate to the truth
    ClassicalDensity classical_prior;
    ClassicalDensity classical_posterior;
    DensityOperator quantum_prior;      // empty in classical mode
    DensityOperator quantum_posterior;  // empty in classical mode
    double estimate;        // estimated angle
    double classical_estimate;
};

struct FilterTrace {
    FilterMode mode;
    std::vector<FilterStep> steps;
};

// Generated observations y_n = h(Φ^n x0) + noise for n = 1..steps.
std::vector<std::vector<double>> generate_observations(const ObservationModel& model,
                                                       const std::vector<TorusPoint>& truth,
                                                       std::uint64_t seed);

// Orbit filter started from state index x0. The classical filter always runs
// alongside so that the consistency metric is available.
FilterTrace run_filter(const PeriodicOrbitSystem& sys, const ObservationModel& model, int x0,
                       const FilterOptions& opt);

// Circle rotation (d = 1) sampled every dt. Exact quantum mode is rejected:
// only the projected Fourier representation is finite.
FilterTrace run_filter(const RotationSystem& sys, double dt, const ObservationModel& model,
                       const TorusPoint& x0, const FilterOptions& opt);

// `step,mode,evidence,consistency_trace_norm,estimate_error`
void write_filter_csv_header(std::ostream& out);
void write_filter_csv_rows(std::ostream& out, const FilterTrace& trace);

// Parses `t,y_0,...` rows (header required, '#' comments skipped).
std::vector<std::vector<double>> read_observations_csv(std::istream& in);

}  // namespace koopq::qmda
