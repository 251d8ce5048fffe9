#include "koopq/fock.hpp"

#include "koopq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace koopq::fock {

namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double multinomial(const Occupation& occ) {
    double s = log_factorial(grading(occ));
    for (int k : occ) s -= log_factorial(k);
    return std::round(std::exp(s));
}

cplx monomial_value(const Eigen::VectorXcd& c, const Occupation& occ) {
    cplx v = 1.0;
    for (std::size_t k = 0; k < occ.size(); ++k)
        for (int r = 0; r < occ[k]; ++r) v *= c(static_cast<Eigen::Index>(k));
    return v;
}

double phase_rate(const ModeSet& modes, const Occupation& occ) {
    if (occ.size() != modes.size()) throw DomainError("Fock vector / mode set size mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < occ.size(); ++k) s += occ[k] * modes.omega[k];
    return s;
}

void enumerate(std::size_t modes, int n, std::size_t k, Occupation& cur,
               std::vector<Occupation>& out) {
    if (k + 1 == modes) {
        cur[k] = n;
        out.push_back(cur);
        return;
    }
    for (int c = n; c >= 0; --c) {
        cur[k] = c;
        enumerate(modes, n - c, k + 1, cur, out);
    }
    cur[k] = 0;
}

double sup_norm_bound(const dynamics::FourierObservable& f) {
    double s = 0.0;
    for (const auto& [j, c] : f.coefficients()) s += std::abs(c);
    return s;
}

}  // namespace

FockWeight::FockWeight(double sigma_w, double p_w, int nmax) : sigma_(sigma_w), p_(p_w), nmax_(nmax) {
    if (!(sigma_w > 0.0) || !std::isfinite(sigma_w))
        throw DomainError("FockWeight: sigma_w must be > 0");
    if (!(p_w > 0.0 && p_w < 1.0)) throw DomainError("FockWeight: p_w must lie in (0,1)");
    if (nmax < 0 || nmax > 16) throw DomainError("FockWeight: Nmax must lie in [0,16]");
}

double FockWeight::operator()(int n) const {
    return n == 0 ? 1.0 : std::exp(sigma_ * std::pow(static_cast<double>(n), p_));
}

double FockWeight::inv_sq(int n) const {
    return n == 0 ? 1.0 : std::exp(-2.0 * sigma_ * std::pow(static_cast<double>(n), p_));
}

double FockWeight::tail_inv_sq() const {
    CompensatedSum s;
    for (int n = nmax_ + 1;; ++n) {
        const double v = inv_sq(n);
        s += v;
        if (v < 1e-300 || n > nmax_ + 100000) break;
    }
    return s.value();
}

double FockWeight::tail_series(double r) const {
    if (r < 0.0 || r > 1.0 + 1e-12) throw DomainError("tail_series: radius must lie in [0,1]");
    if (r == 0.0) return 0.0;
    CompensatedSum s;
    for (int n = nmax_ + 1; n <= nmax_ + 100000; ++n) {
        const double v = std::exp(-sigma_ * std::pow(static_cast<double>(n), p_) + n * std::log(r));
        s += v;
        if (v < 1e-300) break;
    }
    return s.value();
}

int grading(const Occupation& occ) { return std::accumulate(occ.begin(), occ.end(), 0); }

std::vector<Occupation> occupations(std::size_t modes, int n) {
    if (modes < 1) throw DomainError("occupations: need at least one mode");
    if (n < 0) throw DomainError("occupations: grading must be >= 0");
    std::vector<Occupation> out;
    Occupation cur(modes, 0);
    enumerate(modes, n, 0, cur, out);
    return out;
}

double occupation_norm_sq(const FockWeight& w, const Occupation& occ) {
    const int n = grading(occ);
    double s = 2.0 * std::log(w(n)) - log_factorial(n);
    for (int k : occ) {
        if (k < 0) throw DomainError("occupation counts must be >= 0");
        s += log_factorial(k);
    }
    return std::exp(s);
}

FockVector FockVector::vacuum(std::size_t modes, cplx c) {
    FockVector v(modes);
    v.add(Occupation(modes, 0), c);
    return v;
}

FockVector FockVector::mode(std::size_t modes, std::size_t k, cplx c) {
    if (k >= modes) throw OutOfLatticeError("FockVector::mode: index out of range");
    Occupation occ(modes, 0);
    occ[k] = 1;
    return monomial(occ, c);
}

FockVector FockVector::monomial(const Occupation& occ, cplx c) {
    FockVector v(occ.size());
    v.add(occ, c);
    return v;
}

cplx FockVector::amplitude(const Occupation& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? cplx{} : it->second;
}

int FockVector::max_grading() const {
    int n = 0;
    for (const auto& [occ, c] : terms_) n = std::max(n, grading(occ));
    return n;
}

void FockVector::add(const Occupation& occ, cplx c) {
    if (occ.size() != modes_) throw DomainError("FockVector: occupation size mismatch");
    for (int k : occ)
        if (k < 0) throw DomainError("FockVector: occupation counts must be >= 0");
    terms_[occ] += c;
}

FockVector& FockVector::operator+=(const FockVector& o) {
    if (o.modes_ != modes_) throw DomainError("FockVector: mode count mismatch");
    for (const auto& [occ, c] : o.terms_) terms_[occ] += c;
    return *this;
}

FockVector& FockVector::operator*=(cplx c) {
    for (auto& [occ, v] : terms_) v *= c;
    return *this;
}

FockVector FockVector::grading_part(int n) const {
    FockVector out(modes_);
    for (const auto& [occ, c] : terms_)
        if (grading(occ) == n) out.terms_.emplace(occ, c);
    return out;
}

cplx fock_inner(const FockWeight& w, const FockVector& u, const FockVector& v) {
    if (u.modes() != v.modes()) throw DomainError("fock_inner: mode count mismatch");
    if (u.max_grading() > w.nmax() || v.max_grading() > w.nmax())
        throw DomainError("fock_inner: grading above Nmax");
    CompensatedSumC acc;
    for (const auto& [occ, c] : u.terms()) {
        const cplx d = v.amplitude(occ);
        if (d == cplx{}) continue;
        acc += std::conj(c) * d * occupation_norm_sq(w, occ);
    }
    return acc.value();
}

double fock_norm(const FockWeight& w, const FockVector& u) {
    return std::sqrt(std::max(0.0, fock_inner(w, u, u).real()));
}

Truncated sym_product(const FockWeight& w, const FockVector& u, const FockVector& v) {
    if (u.modes() != v.modes()) throw DomainError("sym_product: mode count mismatch");
    FockVector kept(u.modes());
    FockVector dropped(u.modes());
    Occupation occ(u.modes());
    for (const auto& [a, ca] : u.terms()) {
        for (const auto& [b, cb] : v.terms()) {
            for (std::size_t k = 0; k < occ.size(); ++k) occ[k] = a[k] + b[k];
            (grading(occ) <= w.nmax() ? kept : dropped).add(occ, ca * cb);
        }
    }
    CompensatedSum lost;
    for (const auto& [o, c] : dropped.terms()) lost += std::norm(c) * occupation_norm_sq(w, o);
    return {std::move(kept), lost.value()};
}

FockVector symmetric_power(const Eigen::VectorXcd& c, int m) {
    const auto modes = static_cast<std::size_t>(c.size());
    FockVector out(modes);
    for (const auto& occ : occupations(modes, m)) {
        const cplx v = multinomial(occ) * monomial_value(c, occ);
        if (v != cplx{}) out.add(occ, v);
    }
    return out;
}

ModeSet ModeSet::from_generator(const spectral::GeneratorSpec& gen, std::size_t m) {
    if (m < 1 || m > 8) throw DomainError("ModeSet: between 1 and 8 modes are supported");
    if (m > gen.modes().size()) throw DomainError("ModeSet: more modes than lattice points");
    ModeSet out;
    out.vectors.resize(static_cast<Eigen::Index>(gen.lattice().size()),
                       static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
        out.omega.push_back(gen.modes()[k].omega);
        out.vectors.col(static_cast<Eigen::Index>(k)) = gen.modes()[k].vector;
    }
    return out;
}

Eigen::VectorXcd ModeSet::coordinates(const Eigen::VectorXcd& u) const {
    if (u.size() != vectors.rows()) throw DomainError("ModeSet::coordinates: length mismatch");
    return vectors.adjoint() * u;
}

FockVector lifted_generator_apply(const ModeSet& modes, const FockVector& v) {
    FockVector out(v.modes());
    for (const auto& [occ, c] : v.terms()) {
        const double rate = phase_rate(modes, occ);
        if (rate != 0.0) out.add(occ, cplx(0.0, rate) * c);
    }
    return out;
}

FockVector lifted_evolve(const ModeSet& modes, const FockVector& v, double t) {
    FockVector out(v.modes());
    for (const auto& [occ, c] : v.terms()) out.add(occ, std::polar(1.0, t * phase_rate(modes, occ)) * c);
    return out;
}

SpectrumTorusPoint SpectrumTorusPoint::from_coordinates(const Eigen::VectorXcd& c) {
    SpectrumTorusPoint pt{Eigen::VectorXd(c.size()), Eigen::VectorXcd(c.size())};
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        pt.a(k) = std::abs(c(k));
        pt.z(k) = pt.a(k) > 0.0 ? c(k) / pt.a(k) : cplx(1.0);
    }
    return pt;
}

Eigen::VectorXcd SpectrumTorusPoint::coordinates() const {
    return a.cast<cplx>().cwiseProduct(z);
}

void validate(const SpectrumTorusPoint& pt) {
    if (pt.a.size() != pt.z.size()) throw DomainError("SpectrumTorusPoint: a/z size mismatch");
    for (Eigen::Index k = 0; k < pt.a.size(); ++k) {
        if (!(pt.a(k) >= 0.0)) throw DomainError("SpectrumTorusPoint: amplitudes must be >= 0");
        if (std::abs(std::abs(pt.z(k)) - 1.0) > 1e-12)
            throw DomainError("SpectrumTorusPoint: phases must be unimodular");
    }
    if (pt.a.norm() > 1.0 + 1e-12)
        throw DomainError("SpectrumTorusPoint: amplitude norm exceeds the radius of convergence");
}

SpectrumTorusPoint spectrum_rotate(const SpectrumTorusPoint& pt, const ModeSet& modes, double t) {
    validate(pt);
    if (static_cast<std::size_t>(pt.z.size()) != modes.size())
        throw DomainError("spectrum_rotate: mode count mismatch");
    SpectrumTorusPoint out = pt;
    for (Eigen::Index k = 0; k < out.z.size(); ++k)
        out.z(k) *= std::polar(1.0, -modes.omega[static_cast<std::size_t>(k)] * t);
    return out;
}

XiSeries xi_series(const FockWeight& w, const SpectrumTorusPoint& pt) {
    validate(pt);
    const Eigen::VectorXcd c = pt.coordinates();
    FockVector xi(static_cast<std::size_t>(c.size()));
    for (int n = 0; n <= w.nmax(); ++n) xi += w.inv_sq(n) * symmetric_power(c, n);
    return {std::move(xi), w.tail_series(std::min(1.0, pt.a.norm()))};
}

cplx gelfand_eval(const FockWeight& w, const SpectrumTorusPoint& pt, const FockVector& v) {
    return fock_inner(w, xi_series(w, pt).xi, v);
}

ForecastResult second_quantization_forecast(const dynamics::FourierObservable& f,
                                            const spectral::GeneratorSpec& gen,
                                            const ForecastParams& params,
                                            const dynamics::TorusPoint& x, double t) {
    const auto& lat = gen.lattice();
    if (lat.dim() != 1 || f.dim() != 1 || x.dim() != 1)
        throw DomainError("second_quantization_forecast: circle (d = 1) only");
    if (params.m < 1 || params.m > params.weight.nmax())
        throw DomainError("second_quantization_forecast: m must lie in [1, Nmax]");
    if (!(params.tau > 0.0) || !(params.sigma >= 2.0 * params.tau))
        throw DomainError("second_quantization_forecast: need 0 < tau <= sigma/2");
    if (!(params.kernel_kappa > 0.0))
        throw DomainError("second_quantization_forecast: kernel_kappa must be > 0");
    if (params.grid < 8) throw DomainError("second_quantization_forecast: grid must be >= 8");
    if (!f.is_real()) throw DomainError("second_quantization_forecast: f must be real");

    const ModeSet modes = ModeSet::from_generator(gen, params.modes);
    const rkha::SubexpWeight w_tau(params.tau, params.p, 1);
    const rkha::SubexpWeight w_sigma(params.sigma, params.p, 1);
    const int bw = lat.bandwidth();

    // κ(x,y) = Σ_j e^{-κ} I_j(κ) e^{ij(x-y)}
    const auto ratios = bessel_i_ratios(params.kernel_kappa, bw);
    const double i0 = bessel_i0_scaled(params.kernel_kappa);

    // Lift 𝒦_{m,τ} f and 𝒦_{m,τ} 1 by quadrature over the grid.
    const auto occs = occupations(modes.size(), params.m);
    std::vector<double> multi;
    for (const auto& occ : occs) multi.push_back(multinomial(occ));
    std::vector<CompensatedSumC> acc_f(occs.size()), acc_1(occs.size());
    const auto n_grid = static_cast<double>(params.grid);
    Eigen::VectorXcd section(static_cast<Eigen::Index>(lat.size()));
    for (std::size_t q = 0; q < params.grid; ++q) {
        const double y = two_pi * static_cast<double>(q) / n_grid;
        for (std::size_t k = 0; k < lat.size(); ++k) {
            const int j = lat[k][0];
            section(static_cast<Eigen::Index>(k)) =
                std::sqrt(w_tau(lat[k])) * i0 * ratios[std::abs(j)] * std::polar(1.0, -j * y);
        }
        const Eigen::VectorXcd b = modes.coordinates(section);
        const double fy = dynamics::evaluate(f, dynamics::TorusPoint({y})).real() / n_grid;
        for (std::size_t r = 0; r < occs.size(); ++r) {
            const cplx v = multi[r] * monomial_value(b, occs[r]);
            acc_f[r] += fy * v;
            acc_1[r] += v / n_grid;
        }
    }
    FockVector lift_f(modes.size()), lift_1(modes.size());
    for (std::size_t r = 0; r < occs.size(); ++r) {
        lift_f.add(occs[r], acc_f[r].value());
        lift_1.add(occs[r], acc_1[r].value());
    }
    lift_f = lifted_evolve(modes, lift_f, t);
    lift_1 = lifted_evolve(modes, lift_1, t);

    // Feature point η = φ_σ(x)/ϖ_σ² in ψ_τ coordinates.
    const double varpi_sq = std::pow(rkha::feature_norm_bound(w_sigma, lat), 2);
    Eigen::VectorXcd eta(static_cast<Eigen::Index>(lat.size()));
    for (std::size_t k = 0; k < lat.size(); ++k) {
        const double mag = std::exp(-w_sigma.neg_log(lat[k]) + 0.5 * w_tau.neg_log(lat[k]));
        eta(static_cast<Eigen::Index>(k)) = mag * std::polar(1.0, -lat[k][0] * x[0]) / varpi_sq;
    }
    const SpectrumTorusPoint pt = SpectrumTorusPoint::from_coordinates(modes.coordinates(eta));
    const XiSeries xi = xi_series(params.weight, pt);

    const cplx g = fock_inner(params.weight, xi.xi, lift_f);
    const cplx h = fock_inner(params.weight, xi.xi, lift_1);
    if (!(std::abs(h) >= 1e-8))
        throw DegeneracyError("second_quantization_forecast: normalisation |h| below 1e-8");
    return {(g / h).real(), xi.tail_bound, g, h};
}

TensorNetworkResult tensor_network_expectation(const dynamics::FourierObservable& f,
                                               const spectral::GeneratorSpec& gen,
                                               const dynamics::TorusPoint& x,
                                               const TensorNetworkParams& params, double t) {
    const auto& lat = gen.lattice();
    if (lat.dim() != 1 || f.dim() != 1 || x.dim() != 1)
        throw DomainError("tensor_network_expectation: circle (d = 1) only");
    if (params.n < 1 || params.n > 3) throw DomainError("tensor_network_expectation: n must be 1, 2 or 3");
    if (!(params.sigma >= 0.0)) throw DomainError("tensor_network_expectation: sigma must be >= 0");
    if (!(params.kappa > 0.0)) throw DomainError("tensor_network_expectation: kappa must be > 0");
    if (!f.is_real()) throw DomainError("tensor_network_expectation: f must be real");

    const int bw = lat.bandwidth();
    const int n = params.n;
    const std::size_t n_grid =
        params.grid > 0 ? params.grid : static_cast<std::size_t>(4 * n * bw + 8);
    if (n_grid <= static_cast<std::size_t>(2 * n * bw + f.bandwidth()))
        throw DomainError("tensor_network_expectation: grid too coarse for exact quadrature");

    // ξ^{1/n} ∝ von Mises with concentration κ/n, evolved by the transfer group.
    const double kn = params.kappa / n;
    const dynamics::VonMisesDensity root{{x[0]}, {kn}};
    Eigen::VectorXcd c = gen.propagate(lat.to_vector(dynamics::von_mises_fourier(root, bw)), -t);
    std::optional<rkha::SubexpWeight> smooth;
    if (params.sigma > 0.0) {
        smooth.emplace(0.5 * params.sigma, params.p, 1);
        for (std::size_t k = 0; k < lat.size(); ++k) c(static_cast<Eigen::Index>(k)) *= (*smooth)(lat[k]);
    }

    CompensatedSum num, den;
    for (std::size_t q = 0; q < n_grid; ++q) {
        const double y = two_pi * static_cast<double>(q) / static_cast<double>(n_grid);
        CompensatedSumC s;
        for (std::size_t k = 0; k < lat.size(); ++k)
            s += c(static_cast<Eigen::Index>(k)) * std::polar(1.0, lat[k][0] * y);
        const double mag = std::norm(std::pow(s.value(), n));
        num += dynamics::evaluate(f, dynamics::TorusPoint({y})).real() * mag;
        den += mag;
    }
    if (!(den.value() > 0.0)) throw DegeneracyError("tensor_network_expectation: zero normalisation");

    // Lattice cutoff: with p = t + r, ‖p^n - t^n‖ <= n A^{n-1} ‖r‖, A >= sup|p|, sup|t|.
    const auto ratios = bessel_i_ratios(kn, bw + 400);
    double tail_sq = 0.0, sup_all = 0.0;
    for (int j = -(bw + 400); j <= bw + 400; ++j) {
        const double lam = smooth ? (*smooth)(MultiIndex{j}) : 1.0;
        const double a = ratios[std::abs(j)] * lam;
        sup_all += a;
        if (std::abs(j) > bw) tail_sq += a * a;
    }
    const double delta = n * std::pow(sup_all, n - 1) * std::sqrt(tail_sq);
    const double q_norm = std::sqrt(den.value() / static_cast<double>(n_grid));
    const double fsup = sup_norm_bound(f);
    const double p_low = q_norm - delta;
    double bound = p_low > 0.0 ? 2.0 * fsup * delta * (2.0 * q_norm + delta) / (p_low * p_low)
                               : std::numeric_limits<double>::infinity();
    // floating-point allowance of the quadrature
    bound += 64.0 * std::numeric_limits<double>::epsilon() * fsup * static_cast<double>(n);
    return {num.value() / den.value(), bound};
}

}  // namespace koopq::fock
