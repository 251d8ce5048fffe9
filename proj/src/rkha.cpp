#include "koopq/rkha.hpp"

#include "koopq/errors.hpp"

#include <algorithm>
#include <cmath>

namespace koopq::rkha {

SubexpWeight::SubexpWeight(double tau, double p, std::size_t dim)
    : tau_(tau), p_(p), dim_(dim) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("SubexpWeight: tau must be > 0");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("SubexpWeight: p must lie in (0,1)");
    if (dim < 1) throw DomainError("SubexpWeight: dimension must be >= 1");
}

double SubexpWeight::neg_log(const MultiIndex& j) const {
    if (j.size() != dim_) throw DomainError("SubexpWeight: index dimension mismatch");
    double s = 0.0;
    for (int ji : j)
        if (ji != 0) s += std::pow(std::abs(static_cast<double>(ji)), p_);
    return tau_ * s;
}

double SubexpWeight::operator()(const MultiIndex& j) const {
    // product of per-axis factors so that λ_τ λ_σ = λ_{τ+σ} holds factorwise
    if (j.size() != dim_) throw DomainError("SubexpWeight: index dimension mismatch");
    double v = 1.0;
    for (int ji : j)
        if (ji != 0) v *= std::exp(-tau_ * std::pow(std::abs(static_cast<double>(ji)), p_));
    return v;
}

double weight(const SubexpWeight& w, const MultiIndex& j) { return w(j); }

TruncatedLattice::TruncatedLattice(std::size_t dim, int bandwidth)
    : dim_(dim), bandwidth_(bandwidth) {
    if (dim < 1) throw DomainError("TruncatedLattice: dimension must be >= 1");
    if (bandwidth < 0) throw DomainError("TruncatedLattice: bandwidth must be >= 0");
    std::size_t side = 2 * static_cast<std::size_t>(bandwidth) + 1;
    std::size_t n = 1;
    for (std::size_t i = 0; i < dim; ++i) n *= side;
    points_.reserve(n);
    MultiIndex j(dim, -bandwidth);
    for (;;) {
        points_.push_back(j);
        std::size_t k = dim;
        while (k > 0 && j[k - 1] == bandwidth) j[--k] = -bandwidth;
        if (k == 0) break;
        ++j[k - 1];
    }
}

bool TruncatedLattice::contains(const MultiIndex& j) const noexcept {
    if (j.size() != dim_) return false;
    for (int ji : j)
        if (std::abs(ji) > bandwidth_) return false;
    return true;
}

std::size_t TruncatedLattice::index_of(const MultiIndex& j) const {
    if (!contains(j)) throw OutOfLatticeError("index outside truncated lattice");
    const std::size_t side = 2 * static_cast<std::size_t>(bandwidth_) + 1;
    std::size_t k = 0;
    for (int ji : j) k = k * side + static_cast<std::size_t>(ji + bandwidth_);
    return k;
}

Eigen::VectorXcd TruncatedLattice::to_vector(const FourierObservable& f) const {
    if (f.dim() != dim_) throw DomainError("to_vector: dimension mismatch");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(size()));
    for (const auto& [j, c] : f.coefficients()) {
        if (!contains(j)) {
            if (c == cplx{}) continue;
            throw OutOfLatticeError("observable has support outside the lattice");
        }
        v(static_cast<Eigen::Index>(index_of(j))) = c;
    }
    return v;
}

FourierObservable TruncatedLattice::from_vector(const Eigen::VectorXcd& v) const {
    if (v.size() != static_cast<Eigen::Index>(size()))
        throw DomainError("from_vector: length mismatch");
    FourierObservable f(dim_);
    for (std::size_t k = 0; k < size(); ++k) f.set(points_[k], v(static_cast<Eigen::Index>(k)));
    return f;
}

cplx kernel_eval(const SubexpWeight& w, const TruncatedLattice& lat, const TorusPoint& x,
                 const TorusPoint& y) {
    if (x.dim() != lat.dim() || y.dim() != lat.dim())
        throw DomainError("kernel_eval: dimension mismatch");
    CompensatedSumC acc;
    for (const auto& j : lat.points()) {
        double phase = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i) phase += j[i] * (y[i] - x[i]);
        acc += w(j) * std::polar(1.0, phase);
    }
    return acc.value();
}

double truncated_self_convolution(const WeightFn& w, const TruncatedLattice& lat,
                                  const MultiIndex& j) {
    CompensatedSum acc;
    MultiIndex rest(lat.dim());
    for (const auto& a : lat.points()) {
        for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = j[i] - a[i];
        if (lat.contains(rest)) acc += w(a) * w(rest);
    }
    return acc.value();
}

double subconvolutivity_constant(const WeightFn& w, const TruncatedLattice& lat) {
    double c = 0.0;
    for (const auto& j : lat.points()) {
        const double lj = w(j);
        if (lj <= 0.0) continue;  // off-support of an injected weight
        c = std::max(c, truncated_self_convolution(w, lat, j) / lj);
    }
    return c;
}

double subconvolutivity_constant(const SubexpWeight& w, const TruncatedLattice& lat) {
    return subconvolutivity_constant(WeightFn([&w](const MultiIndex& j) { return w(j); }), lat);
}

std::vector<double> grs_check(const SubexpWeight& w, const MultiIndex& gamma, int nmax) {
    if (std::all_of(gamma.begin(), gamma.end(), [](int g) { return g == 0; }))
        throw DomainError("grs_check: gamma must be nonzero");
    if (nmax < 1) throw DomainError("grs_check: nmax must be >= 1");
    // λ(nγ)^{1/n} = exp(-τ n^{p-1} Σ|γ_i|^p)
    const double base = w.neg_log(gamma);
    std::vector<double> out(static_cast<std::size_t>(nmax));
    for (int n = 1; n <= nmax; ++n)
        out[n - 1] = std::exp(-base * std::pow(static_cast<double>(n), w.exponent() - 1.0));
    return out;
}

BdCheck bd_check(const SubexpWeight& w, const MultiIndex& gamma, long nmax) {
    if (nmax < 1) throw DomainError("bd_check: nmax must be >= 1");
    const double base = w.neg_log(gamma);
    const double p = w.exponent();
    CompensatedSum s;
    // ln(1/λ(nγ)) = τ n^p Σ|γ_i|^p, so the summand is base · n^{p-2}
    for (long n = nmax; n >= 1; --n) s += base * std::pow(static_cast<double>(n), p - 2.0);
    // Σ_{n>N} n^{p-2} <= ∫_N^∞ x^{p-2} dx = N^{p-1}/(1-p)
    const double tail = base * std::pow(static_cast<double>(nmax), p - 1.0) / (1.0 - p);
    return {s.value(), tail};
}

std::vector<ComultTerm> comult_coeffs(const SubexpWeight& w, const MultiIndex& gamma,
                                      const TruncatedLattice& lat) {
    if (!lat.contains(gamma)) throw OutOfLatticeError("comult_coeffs: gamma outside lattice");
    std::vector<ComultTerm> out;
    const double ng = w.neg_log(gamma);
    MultiIndex beta(lat.dim());
    for (const auto& a : lat.points()) {
        for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = gamma[i] - a[i];
        if (!lat.contains(beta)) continue;
        const double c = std::exp(0.5 * (ng - w.neg_log(a) - w.neg_log(beta)));
        out.push_back({a, beta, c});
    }
    return out;
}

Eigen::VectorXcd feature_coeffs(const SubexpWeight& w, const TruncatedLattice& lat,
                                const TorusPoint& x) {
    if (x.dim() != lat.dim()) throw DomainError("feature_coeffs: dimension mismatch");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(lat.size()));
    for (std::size_t k = 0; k < lat.size(); ++k) {
        const auto& j = lat[k];
        double phase = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i) phase += j[i] * x[i];
        v(static_cast<Eigen::Index>(k)) = std::sqrt(w(j)) * std::polar(1.0, -phase);
    }
    return v;
}

double feature_norm_bound(const SubexpWeight& w, const TruncatedLattice& lat) {
    CompensatedSum s;
    for (const auto& j : lat.points()) s += w(j);
    return std::sqrt(s.value());
}

double DiagonalSmoother::multiplier(const MultiIndex& j) const {
    switch (role_) {
        case SmootherRole::G:
            return w_(j);
        case SmootherRole::K:
        case SmootherRole::K_adjoint:
            return std::sqrt(w_(j));
    }
    return 0.0;
}

FourierObservable DiagonalSmoother::apply(const FourierObservable& f) const {
    if (f.dim() != w_.dim()) throw DomainError("apply_smoother: dimension mismatch");
    FourierObservable out(f.dim());
    for (const auto& [j, c] : f.coefficients()) out.set(j, multiplier(j) * c);
    return out;
}

Eigen::VectorXcd DiagonalSmoother::apply(const TruncatedLattice& lat,
                                         const Eigen::VectorXcd& v) const {
    if (v.size() != static_cast<Eigen::Index>(lat.size()))
        throw DomainError("apply_smoother: length mismatch");
    Eigen::VectorXcd out(v.size());
    for (std::size_t k = 0; k < lat.size(); ++k)
        out(static_cast<Eigen::Index>(k)) = multiplier(lat[k]) * v(static_cast<Eigen::Index>(k));
    return out;
}

double truncation_tail_estimate(const SubexpWeight& w, int bandwidth) {
    return std::exp(-w.tau() * std::pow(static_cast<double>(bandwidth), w.exponent()));
}

}  // namespace koopq::rkha
