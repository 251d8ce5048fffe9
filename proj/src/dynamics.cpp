#include "koopq/dynamics.hpp"

#include "koopq/csv.hpp"
#include "koopq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace koopq::dynamics {

TorusPoint::TorusPoint(std::vector<double> theta) : theta_(std::move(theta)) {
    for (double& v : theta_) {
        if (!std::isfinite(v)) throw DomainError("TorusPoint: non-finite angle");
        v = wrap_angle(v);
    }
}

RotationSystem::RotationSystem(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.empty()) throw DomainError("RotationSystem: dimension must be >= 1");
    for (double a : alpha_)
        if (!std::isfinite(a) || a == 0.0)
            throw DomainError("RotationSystem: frequencies must be finite and nonzero");
}

TorusPoint RotationSystem::flow(const TorusPoint& x, double t) const {
    if (x.dim() != dim()) throw DomainError("flow: point/system dimension mismatch");
    std::vector<double> out(dim());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = x[i] + t * alpha_[i];
    return TorusPoint(std::move(out));
}

PeriodicOrbitSystem::PeriodicOrbitSystem(int states) : m_(states) {
    if (states < 1) throw DomainError("PeriodicOrbitSystem: need at least one state");
}

TorusPoint PeriodicOrbitSystem::point(int i) const {
    return TorusPoint({two_pi * static_cast<double>(i) / m_});
}

Eigen::MatrixXcd PeriodicOrbitSystem::koopman_matrix() const {
    // U e_k = e_{k-1}: (U e_k)(i) = e_k(i+1)
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) u(i, step(i)) = 1.0;
    return u;
}

FourierObservable::FourierObservable(std::size_t dim, Coefficients coeffs)
    : dim_(dim), coeffs_(std::move(coeffs)) {
    for (const auto& [j, c] : coeffs_)
        if (j.size() != dim_) throw DomainError("FourierObservable: index dimension mismatch");
}

FourierObservable FourierObservable::constant(std::size_t dim, cplx c) {
    FourierObservable f(dim);
    f.set(MultiIndex(dim, 0), c);
    return f;
}

FourierObservable FourierObservable::character(const MultiIndex& j, cplx c) {
    FourierObservable f(j.size());
    f.set(j, c);
    return f;
}

FourierObservable FourierObservable::cosine(std::size_t dim, std::size_t axis) {
    if (axis >= dim) throw DomainError("cosine: axis out of range");
    FourierObservable f(dim);
    MultiIndex j(dim, 0);
    j[axis] = 1;
    f.set(j, 0.5);
    j[axis] = -1;
    f.set(j, 0.5);
    return f;
}

int FourierObservable::bandwidth() const noexcept {
    int b = 0;
    for (const auto& [j, c] : coeffs_)
        for (int ji : j) b = std::max(b, std::abs(ji));
    return b;
}

cplx FourierObservable::coefficient(const MultiIndex& j) const {
    auto it = coeffs_.find(j);
    return it == coeffs_.end() ? cplx{} : it->second;
}

void FourierObservable::set(const MultiIndex& j, cplx c) {
    if (j.size() != dim_) throw DomainError("FourierObservable::set: index dimension mismatch");
    coeffs_[j] = c;
}

bool FourierObservable::is_real(double tol) const {
    MultiIndex neg(dim_);
    for (const auto& [j, c] : coeffs_) {
        for (std::size_t i = 0; i < dim_; ++i) neg[i] = -j[i];
        if (std::abs(coefficient(neg) - std::conj(c)) > tol) return false;
    }
    return true;
}

double FourierObservable::l2_norm() const {
    CompensatedSum s;
    for (const auto& [j, c] : coeffs_) s += std::norm(c);
    return std::sqrt(s.value());
}

double VonMisesDensity::operator()(const TorusPoint& x) const {
    if (x.dim() != dim()) throw DomainError("VonMisesDensity: dimension mismatch");
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        // e^{κ(cos-1)} / (e^{-κ} I_0(κ)) avoids overflow for large κ
        const double k = kappa[i];
        v *= std::exp(k * (std::cos(x[i] - mu[i]) - 1.0)) / bessel_i0_scaled(k);
    }
    return v;
}

TorusPoint flow(const RotationSystem& sys, const TorusPoint& x, double t) {
    return sys.flow(x, t);
}

cplx evaluate(const FourierObservable& f, const TorusPoint& x) {
    if (x.dim() != f.dim()) throw DomainError("evaluate: dimension mismatch");
    CompensatedSumC acc;
    for (const auto& [j, c] : f.coefficients()) {
        double phase = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i) phase += j[i] * x[i];
        acc += c * std::polar(1.0, phase);
    }
    return acc.value();
}

FourierObservable koopman_exact(const FourierObservable& f, const RotationSystem& sys,
                                double t) {
    if (f.dim() != sys.dim()) throw DomainError("koopman_exact: dimension mismatch");
    const auto& alpha = sys.frequencies();
    FourierObservable out(f.dim());
    for (const auto& [j, c] : f.coefficients()) {
        double omega = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i) omega += j[i] * alpha[i];
        out.set(j, c * std::polar(1.0, t * omega));
    }
    return out;
}

FourierObservable von_mises_fourier(const VonMisesDensity& p, int bandwidth) {
    if (bandwidth < 0) throw DomainError("von_mises_fourier: bandwidth must be >= 0");
    if (p.mu.size() != p.kappa.size() || p.mu.empty())
        throw DomainError("von_mises_fourier: mu/kappa dimension mismatch");
    const std::size_t d = p.dim();
    std::vector<std::vector<double>> ratios(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!(p.kappa[i] >= 0.0)) throw DomainError("von_mises_fourier: kappa must be >= 0");
        ratios[i] = bessel_i_ratios(p.kappa[i], bandwidth);
    }

    FourierObservable out(d);
    MultiIndex j(d, -bandwidth);
    for (;;) {
        cplx c = 1.0;
        for (std::size_t i = 0; i < d; ++i)
            c *= ratios[i][std::abs(j[i])] * std::polar(1.0, -j[i] * p.mu[i]);
        out.set(j, c);
        std::size_t k = d;
        while (k > 0 && j[k - 1] == bandwidth) j[--k] = -bandwidth;
        if (k == 0) break;
        ++j[k - 1];
    }
    return out;
}

std::vector<TorusPoint> sample_trajectory(const RotationSystem& sys, const TorusPoint& x0,
                                          double dt, std::size_t count) {
    if (count < 1) throw DomainError("sample_trajectory: need at least one sample");
    if (!(dt > 0.0)) throw DomainError("sample_trajectory: dt must be > 0");
    std::vector<TorusPoint> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(sys.flow(x0, dt * static_cast<double>(k)));
    return out;
}

std::optional<std::string> near_rational_warning(const RotationSystem& sys, double tol,
                                                 int max_den) {
    const auto& a = sys.frequencies();
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (i == k) continue;
            const double r = a[i] / a[k];
            for (int q = 1; q <= max_den; ++q) {
                const double p = std::round(r * q);
                if (std::abs(r - p / q) <= tol) {
                    std::ostringstream msg;
                    msg << "alpha[" << i << "]/alpha[" << k << "] is within " << tol
                        << " of " << static_cast<long long>(p) << "/" << q
                        << "; rotation may not be ergodic";
                    return msg.str();
                }
            }
        }
    }
    return std::nullopt;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TorusPoint>& traj, double dt) {
    const std::size_t d = traj.empty() ? 0 : traj.front().dim();
    out << "t";
    for (std::size_t i = 0; i < d; ++i) out << ",theta_" << i;
    out << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << csv::fmt(static_cast<double>(k) * dt);
        for (std::size_t i = 0; i < d; ++i) out << ',' << csv::fmt(traj[k][i]);
        out << '\n';
    }
}

}  // namespace koopq::dynamics
