#include "koopq/spectral.hpp"

#include "koopq/csv.hpp"
#include "koopq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace koopq::spectral {

namespace {

std::size_t argmax_abs(const Eigen::VectorXcd& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    return static_cast<std::size_t>(k);
}

void sort_modes(std::vector<Eigenpair>& modes) {
    double scale = 0.0;
    for (const auto& m : modes) scale = std::max(scale, std::abs(m.omega));
    const double quantum = 1e-12 * std::max(scale, 1.0);
    auto key = [quantum](const Eigenpair& m) {
        return std::make_tuple(std::llround(std::abs(m.omega) / quantum), m.omega < 0.0,
                               m.anchor);
    };
    std::stable_sort(modes.begin(), modes.end(),
                     [&](const Eigenpair& a, const Eigenpair& b) { return key(a) < key(b); });
}

// Eigenpairs of a skew-Hermitian matrix.
std::vector<Eigenpair> skew_eigenpairs(const Eigen::MatrixXcd& a) {
    Eigen::MatrixXcd h = -imag_unit * a;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw DegeneracyError("generator eigendecomposition failed");
    std::vector<Eigenpair> out;
    out.reserve(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
        Eigen::VectorXcd v = es.eigenvectors().col(k);
        const std::size_t anchor = argmax_abs(v);
        // fix the phase so the dominant component is real positive
        const cplx ph = v(static_cast<Eigen::Index>(anchor));
        v *= std::conj(ph) / std::abs(ph);
        out.push_back({es.eigenvalues()(k), std::move(v), anchor});
    }
    return out;
}

}  // namespace

GeneratorSpec::GeneratorSpec(TruncatedLattice lat, Eigen::MatrixXcd matrix,
                             std::vector<Eigenpair> modes, GeneratorKind kind)
    : lat_(std::move(lat)), a_(std::move(matrix)), modes_(std::move(modes)), kind_(kind) {
    const auto n = static_cast<Eigen::Index>(lat_.size());
    if (a_.rows() != n || a_.cols() != n) throw DomainError("GeneratorSpec: matrix size mismatch");
    if (modes_.size() != lat_.size()) throw DomainError("GeneratorSpec: mode count mismatch");
    sort_modes(modes_);
    basis_.resize(n, n);
    omegas_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        basis_.col(k) = modes_[static_cast<std::size_t>(k)].vector;
        omegas_(k) = modes_[static_cast<std::size_t>(k)].omega;
    }
}

double GeneratorSpec::frequency_at(std::size_t k) const {
    if (kind_ != GeneratorKind::Analytic)
        throw DomainError("frequency_at: only defined for analytic generators");
    return a_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).imag();
}

Eigen::VectorXcd GeneratorSpec::propagate(const Eigen::VectorXcd& v, double t) const {
    if (v.size() != a_.rows()) throw DomainError("propagate: length mismatch");
    if (kind_ == GeneratorKind::Analytic) {
        Eigen::VectorXcd out(v.size());
        for (Eigen::Index k = 0; k < v.size(); ++k)
            out(k) = std::polar(1.0, t * a_(k, k).imag()) * v(k);
        return out;
    }
    Eigen::VectorXcd c = basis_.adjoint() * v;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, t * omegas_(k));
    return basis_ * c;
}

Eigen::MatrixXcd GeneratorSpec::propagator(double t) const {
    Eigen::VectorXcd phase(omegas_.size());
    for (Eigen::Index k = 0; k < phase.size(); ++k) phase(k) = std::polar(1.0, t * omegas_(k));
    return basis_ * phase.asDiagonal() * basis_.adjoint();
}

double GeneratorSpec::skew_defect() const {
    if (a_.rows() == 0) return 0.0;
    return (a_ + a_.adjoint()).cwiseAbs().maxCoeff();
}

GeneratorSpec analytic_generator(const RotationSystem& sys, const TruncatedLattice& lat) {
    if (sys.dim() != lat.dim()) throw DomainError("analytic_generator: dimension mismatch");
    const auto n = static_cast<Eigen::Index>(lat.size());
    const auto& alpha = sys.frequencies();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    std::vector<Eigenpair> modes;
    modes.reserve(lat.size());
    for (std::size_t k = 0; k < lat.size(); ++k) {
        double omega = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) omega += lat[k][i] * alpha[i];
        const auto kk = static_cast<Eigen::Index>(k);
        a(kk, kk) = cplx(0.0, omega);
        modes.push_back({omega, Eigen::VectorXcd::Unit(n, kk), k});
    }
    return GeneratorSpec(lat, std::move(a), std::move(modes), GeneratorKind::Analytic);
}

GeneratorSpec data_driven_generator(const std::vector<TorusPoint>& samples, double dt,
                                    const TruncatedLattice& lat) {
    if (samples.size() < 3) throw DomainError("data_driven_generator: need at least 3 samples");
    if (!(dt > 0.0)) throw DomainError("data_driven_generator: dt must be > 0");
    for (const auto& x : samples)
        if (x.dim() != lat.dim()) throw DomainError("data_driven_generator: dimension mismatch");

    const auto n = static_cast<Eigen::Index>(lat.size());
    const std::size_t count = samples.size();

    // Character values on every sample, rows = samples.
    Eigen::MatrixXcd phi(static_cast<Eigen::Index>(count), n);
    for (std::size_t s = 0; s < count; ++s) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto& j = lat[static_cast<std::size_t>(k)];
            double phase = 0.0;
            for (std::size_t i = 0; i < j.size(); ++i) phase += j[i] * samples[s][i];
            phi(static_cast<Eigen::Index>(s), k) = std::polar(1.0, phase);
        }
    }

    // Ergodic averages over interior samples 1..count-2.
    const Eigen::Index m = static_cast<Eigen::Index>(count) - 2;
    const auto mid = phi.middleRows(1, m);
    const Eigen::MatrixXcd diff =
        (phi.bottomRows(m) - phi.topRows(m)) / (2.0 * dt);  // rows s+1 minus rows s-1
    Eigen::MatrixXcd gram = mid.adjoint() * mid / static_cast<double>(m);
    Eigen::MatrixXcd deriv = mid.adjoint() * diff / static_cast<double>(m);
    gram = 0.5 * (gram + gram.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ges(gram, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd gev = ges.eigenvalues();
    const double cutoff = 1e-10 * std::max(gev.maxCoeff(), 1e-300);
    std::size_t deficient = 0;
    for (Eigen::Index k = 0; k < gev.size(); ++k)
        if (gev(k) <= cutoff) ++deficient;
    if (deficient > 0) {
        std::ostringstream msg;
        msg << "data_driven_generator: trajectory of " << count << " samples is too short for "
            << lat.size() << " basis functions (" << deficient << " deficient)";
        throw RankDeficiencyError(msg.str(), deficient);
    }

    Eigen::MatrixXcd a = gram.ldlt().solve(deriv);

    // Reality: A(j,k) = conj(A(-j,-k)), with -j at the mirrored lattice position.
    {
        Eigen::MatrixXcd r(n, n);
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = 0; q < n; ++q)
                r(p, q) = 0.5 * (a(p, q) + std::conj(a(n - 1 - p, n - 1 - q)));
        a = std::move(r);
    }
    // Antisymmetrisation, exact in floating point.
    {
        Eigen::MatrixXcd s(n, n);
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = 0; q < n; ++q) s(p, q) = 0.5 * (a(p, q) - std::conj(a(q, p)));
        a = std::move(s);
    }
    // Deflation: the constant is an exact null vector.
    const auto z = static_cast<Eigen::Index>(lat.zero_index());
    a.row(z).setZero();
    a.col(z).setZero();

    // Keep ψ_0 as an explicit eigenvector; diagonalise the rest.
    std::vector<Eigenpair> modes;
    modes.reserve(lat.size());
    modes.push_back({0.0, Eigen::VectorXcd::Unit(n, z), static_cast<std::size_t>(z)});
    if (n > 1) {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index k = 0; k < n; ++k)
            if (k != z) keep.push_back(k);
        const auto nk = static_cast<Eigen::Index>(keep.size());
        Eigen::MatrixXcd sub(nk, nk);
        for (Eigen::Index p = 0; p < nk; ++p)
            for (Eigen::Index q = 0; q < nk; ++q) sub(p, q) = a(keep[p], keep[q]);
        for (auto& e : skew_eigenpairs(sub)) {
            Eigen::VectorXcd full = Eigen::VectorXcd::Zero(n);
            for (Eigen::Index p = 0; p < nk; ++p) full(keep[p]) = e.vector(p);
            modes.push_back({e.omega, std::move(full), static_cast<std::size_t>(keep[e.anchor])});
        }
    }
    return GeneratorSpec(lat, std::move(a), std::move(modes), GeneratorKind::DataDriven);
}

FourierObservable evolve(const GeneratorSpec& gen, const FourierObservable& f, double t) {
    const auto& lat = gen.lattice();
    return lat.from_vector(gen.propagate(lat.to_vector(f), t));
}

double smoothing_residual(const rkha::SubexpWeight& w, const GeneratorSpec& gen,
                       const FourierObservable& f, double t) {
    using rkha::DiagonalSmoother;
    using rkha::SmootherRole;
    const auto& lat = gen.lattice();
    const Eigen::VectorXcd c = lat.to_vector(f);

    const DiagonalSmoother k(w, SmootherRole::K);
    const DiagonalSmoother k_adj(w, SmootherRole::K_adjoint);
    const Eigen::VectorXcd lhs = k_adj.apply(lat, gen.propagate(k.apply(lat, c), t));

    const rkha::SubexpWeight half(0.5 * w.tau(), w.exponent(), w.dim());
    const DiagonalSmoother g_half(half, SmootherRole::G);
    const Eigen::VectorXcd rhs = g_half.apply(lat, gen.propagate(g_half.apply(lat, c), t));

    return (lhs - rhs).norm();
}

void write_frequency_csv(std::ostream& out, const GeneratorSpec& gen,
                         const GeneratorSpec& analytic) {
    out << "index,omega,abs_error_vs_analytic\n";
    for (std::size_t k = 0; k < gen.modes().size(); ++k) {
        const auto& m = gen.modes()[k];
        const double ref = analytic.frequency_at(m.anchor);
        out << k << ',' << csv::fmt(m.omega) << ',' << csv::fmt(std::abs(m.omega - ref)) << '\n';
    }
}

}  // namespace koopq::spectral
