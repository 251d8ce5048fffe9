#include "koopq/numerics.hpp"

#include "koopq/errors.hpp"

#include <algorithm>
#include <cmath>

namespace koopq {

double wrap_angle(double theta) noexcept {
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    // fmod of a tiny negative value can round up to exactly 2π
    if (r >= two_pi) r = 0.0;
    return r;
}

std::vector<double> bessel_i_ratios(double kappa, int nmax) {
    if (nmax < 0) throw DomainError("bessel_i_ratios: nmax must be >= 0");
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw DomainError("bessel_i_ratios: kappa must be finite and >= 0");

    std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
    out[0] = 1.0;
    if (nmax == 0 || kappa == 0.0) return out;

    // r_n = I_n / I_{n-1} = kappa / (2n + kappa r_{n+1}); a start well past
    // max(n, kappa) makes the truncation error negligible.
    const int start = std::max(nmax, static_cast<int>(std::ceil(kappa))) + 120;
    std::vector<double> ratio(static_cast<std::size_t>(start) + 2, 0.0);
    for (int n = start; n >= 1; --n)
        ratio[n] = kappa / (2.0 * n + kappa * ratio[n + 1]);

    for (int n = 1; n <= nmax; ++n) out[n] = out[n - 1] * ratio[n];
    return out;
}

double bessel_i0_scaled(double x) {
    if (x < 0.0) x = -x;
    if (x < 500.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
    // Hankel asymptotic expansion; next term is below 1e-13 relative here
    const double u = 1.0 / (8.0 * x);
    return (1.0 + u * (1.0 + u * (4.5 + u * (37.5 + u * 459.375)))) /
           std::sqrt(two_pi * x);
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& a) {
    return 0.5 * (a + a.adjoint());
}

double min_hermitian_eigenvalue(const Eigen::MatrixXcd& a) {
    if (a.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(a),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double trace_norm(const Eigen::MatrixXcd& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    if (a.rows() == a.cols() && (a - a.adjoint()).cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues().sum();
}

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& a, double lo, double hi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(a));
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        ev(i) = std::sqrt(std::clamp(ev(i), lo, hi));
    const auto& v = es.eigenvectors();
    return v * ev.asDiagonal() * v.adjoint();
}

Eigen::MatrixXcd expm_skew(const Eigen::MatrixXcd& a, double t) {
    // A = iH with H Hermitian, exp(tA) = V diag(e^{i t h}) V^†
    Eigen::MatrixXcd h = -imag_unit * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(h));
    Eigen::VectorXcd phase(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phase.size(); ++i)
        phase(i) = std::exp(imag_unit * (t * es.eigenvalues()(i)));
    const auto& v = es.eigenvectors();
    return v * phase.asDiagonal() * v.adjoint();
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    if (u.rows() == 0) return 0.0;
    Eigen::MatrixXcd d = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

}  // namespace koopq
