// oracles.hpp - slow, independent reference computations used by the tests.
// Nothing here calls into the library except for plain data types.

#pragma once

#include <koopq/numerics.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using koopq::cplx;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline cplx gaussian_c() {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng()), n(rng())};
}

inline MatrixXcd random_psd(int n, int rank) {
    MatrixXcd b(n, rank);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < rank; ++k) b(i, k) = gaussian_c();
    return b * b.adjoint();
}

inline MatrixXcd random_unitary(int n) {
    MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) a(i, k) = gaussian_c();
    Eigen::HouseholderQR<MatrixXcd> qr(a);
    return qr.householderQ();
}

// Dense Padé/scaling-squaring exponential from Eigen's unsupported module.
inline MatrixXcd expm(const MatrixXcd& a) { return a.exp(); }

// Dense 2^n × 2^n Walsh-Hadamard matrix, H(s,b) = (-1)^{popcount(s & b)}.
inline Eigen::MatrixXd hadamard(int n) {
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXd h(dim, dim);
    for (std::size_t s = 0; s < dim; ++s)
        for (std::size_t b = 0; b < dim; ++b) h(s, b) = (std::popcount(s & b) % 2) ? -1.0 : 1.0;
    return h;
}

// Symmetric tensor inner product by brute force:
// ⟨f_1∨…∨f_n, g_1∨…∨g_n⟩ = w²(n)/n!² Σ_{σ,σ'} Π_i ⟨f_σ(i), g_σ'(i)⟩ with
// orthonormal modes, i.e. ⟨ζ_a, ζ_b⟩ = δ_ab.
inline double permutation_sum_inner(const std::vector<int>& occ_u, const std::vector<int>& occ_v,
                                    double w_sq) {
    std::vector<int> f, g;
    for (std::size_t k = 0; k < occ_u.size(); ++k)
        for (int r = 0; r < occ_u[k]; ++r) f.push_back(static_cast<int>(k));
    for (std::size_t k = 0; k < occ_v.size(); ++k)
        for (int r = 0; r < occ_v[k]; ++r) g.push_back(static_cast<int>(k));
    if (f.size() != g.size()) return 0.0;
    const std::size_t n = f.size();
    std::vector<std::size_t> s(n), sp(n);
    std::iota(s.begin(), s.end(), 0);
    double total = 0.0, fact = 1.0;
    for (std::size_t i = 2; i <= n; ++i) fact *= static_cast<double>(i);
    do {
        std::iota(sp.begin(), sp.end(), 0);
        do {
            bool all = true;
            for (std::size_t i = 0; i < n && all; ++i) all = f[s[i]] == g[sp[i]];
            if (all) total += 1.0;
        } while (std::next_permutation(sp.begin(), sp.end()));
    } while (std::next_permutation(s.begin(), s.end()));
    return w_sq * total / (fact * fact);
}

// Uniform-grid quadrature of a 2π-periodic function (spectrally exact for
// trigonometric polynomials of degree < n).
template <class F>
cplx circle_mean(F&& f, int n) {
    cplx s = 0.0;
    for (int k = 0; k < n; ++k) s += f(koopq::two_pi * k / n);
    return s / static_cast<double>(n);
}

// e^{-τ|j|^p}
inline double lambda(double tau, double p, int j) { return std::exp(-tau * std::pow(std::abs(j), p)); }

}  // namespace oracle
