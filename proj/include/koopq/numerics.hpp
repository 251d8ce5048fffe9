// numerics.hpp - small dense linear-algebra and summation helpers shared by
// every module.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace koopq {

using cplx = std::complex<double>;
using MultiIndex = std::vector<int>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx imag_unit{0.0, 1.0};

// Canonical representative of an angle in [0, 2π).
double wrap_angle(double theta) noexcept;

// Neumaier-compensated accumulator. Sums are order-independent to a few ulps
// of the total, which keeps parallel quadrature reproducible.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double v) noexcept { add(v); return *this; }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class CompensatedSumC {
public:
    void add(cplx v) noexcept { re_.add(v.real()); im_.add(v.imag()); }
    CompensatedSumC& operator+=(cplx v) noexcept { add(v); return *this; }
    cplx value() const noexcept { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_, im_;
};

// Ratios I_n(kappa)/I_0(kappa) for n = 0..nmax (modified Bessel functions of
// the first kind), by backward recurrence on successive ratios. Relative error
// below 1e-12 for kappa in [0, 1e4].
std::vector<double> bessel_i_ratios(double kappa, int nmax);

// e^{-x} I_0(x) for x >= 0, finite for all x.
double bessel_i0_scaled(double x);

// Hermitian part (A + A^†)/2.
Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& a);

// Minimum eigenvalue of the Hermitian part of a.
double min_hermitian_eigenvalue(const Eigen::MatrixXcd& a);

// Sum of singular values; for Hermitian input, sum of |eigenvalues|.
double trace_norm(const Eigen::MatrixXcd& a);

// Positive square root of a Hermitian PSD matrix. Eigenvalues are clamped to
// [lo, hi] before the square root is taken.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& a, double lo = 0.0,
                          double hi = std::numeric_limits<double>::infinity());

// exp(t A) for skew-Hermitian A via unitary diagonalisation of -iA.
Eigen::MatrixXcd expm_skew(const Eigen::MatrixXcd& a, double t);

// max_{ij} |U^† U - I|
double unitarity_defect(const Eigen::MatrixXcd& u);

}  // namespace koopq
