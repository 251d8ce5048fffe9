#include "oracles.hpp"

#include <doctest.h>
#include <koopq/errors.hpp>
#include <koopq/fock.hpp>

#include <numeric>

using namespace koopq;
using namespace koopq::fock;
using dynamics::FourierObservable;
using dynamics::TorusPoint;

namespace {

FockVector random_fock(std::size_t modes, int max_grading) {
    FockVector v(modes);
    for (int n = 0; n <= max_grading; ++n)
        for (const auto& occ : occupations(modes, n)) v.add(occ, oracle::gaussian_c());
    return v;
}

double distance(const FockWeight& w, const FockVector& a, const FockVector& b) { return fock_norm(w, a - b); }

// Dense symmetric tensor of one grading: Σ_occ c_occ Sym(ζ_{k_1} ⊗ … ⊗ ζ_{k_n}),
// flattened over M^n entries.
Eigen::VectorXcd to_tensor(const FockVector& v, int n) {
    const std::size_t m = v.modes();
    std::size_t dim = 1;
    for (int i = 0; i < n; ++i) dim *= m;
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    for (const auto& [occ, c] : v.terms()) {
        if (grading(occ) != n) continue;
        std::vector<int> list;
        for (std::size_t k = 0; k < m; ++k)
            for (int r = 0; r < occ[k]; ++r) list.push_back(static_cast<int>(k));
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        double count = 0.0;
        std::vector<std::size_t> hits;
        do {
            std::size_t idx = 0;
            for (int i = 0; i < n; ++i) idx = idx * m + static_cast<std::size_t>(list[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
            hits.push_back(idx);
            count += 1.0;
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (auto idx : hits) t(static_cast<Eigen::Index>(idx)) += c / count;
    }
    return t;
}

Eigen::VectorXcd symmetrize(const Eigen::VectorXcd& t, std::size_t m, int n) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(t.size());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double count = 0.0;
    do {
        for (Eigen::Index idx = 0; idx < t.size(); ++idx) {
            std::vector<std::size_t> digits(static_cast<std::size_t>(n));
            auto r = static_cast<std::size_t>(idx);
            for (int i = n - 1; i >= 0; --i) {
                digits[static_cast<std::size_t>(i)] = r % m;
                r /= m;
            }
            std::size_t p = 0;
            for (int i = 0; i < n; ++i) p = p * m + digits[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
            out(static_cast<Eigen::Index>(p)) += t(idx);
        }
        count += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out / count;
}

Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    Eigen::VectorXcd out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

ModeSet toy_modes(std::size_t m) {
    ModeSet s;
    for (std::size_t k = 0; k < m; ++k) s.omega.push_back(k == 0 ? 0.0 : oracle::uniform(-3, 3));
    s.vectors = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    return s;
}

SpectrumTorusPoint random_point(std::size_t m, double radius) {
    SpectrumTorusPoint pt;
    pt.a = Eigen::VectorXd(static_cast<Eigen::Index>(m));
    pt.z = Eigen::VectorXcd(static_cast<Eigen::Index>(m));
    for (Eigen::Index k = 0; k < pt.a.size(); ++k) {
        pt.a(k) = oracle::uniform(0, 1);
        pt.z(k) = std::polar(1.0, oracle::uniform(0, two_pi));
    }
    pt.a *= radius / pt.a.norm();
    return pt;
}

// κ(x,y) coefficients e^{-κ}I_j(κ) by quadrature, independent of the library.
double kernel_coefficient(double kappa, int j) {
    return oracle::circle_mean([&](double th) { return cplx(std::exp(kappa * (std::cos(th) - 1.0)) * std::cos(j * th)); }, 512)
        .real();
}

}  // namespace

TEST_SUITE("fock") {

TEST_CASE("weight") {
    const FockWeight w;
    CHECK(w(0) == 1.0);
    for (int n = 1; n < 10; ++n) CHECK(w(n) > w(n - 1));
    CHECK(w.tail_inv_sq() < 1e-6);
    CHECK_THROWS_AS(FockWeight(0.0, 0.5, 3), DomainError);
    CHECK_THROWS_AS(FockWeight(1.0, 1.0, 3), DomainError);
}

TEST_CASE("inner product examples") {
    const FockWeight w;
    const auto omega = FockVector::vacuum(3);
    CHECK(fock_inner(w, omega, omega) == cplx(1.0));
    const auto z1 = FockVector::mode(3, 1);
    CHECK(fock_inner(w, z1, z1).real() == doctest::Approx(std::pow(w(1), 2)).epsilon(1e-14));
    const auto z12 = sym_product(w, z1, FockVector::mode(3, 2)).value;
    CHECK(fock_inner(w, z12, z12).real() == doctest::Approx(std::pow(w(2), 2) / 2).epsilon(1e-14));
    const auto z11 = sym_product(w, z1, z1).value;
    CHECK(fock_inner(w, z11, z11).real() == doctest::Approx(std::pow(w(2), 2)).epsilon(1e-14));
    CHECK(fock_inner(w, omega, z1) == cplx(0.0));
}

TEST_CASE("closed form equals the permutation sum") {
    const FockWeight w(1.0, 0.5, 6);
    for (int n = 0; n <= 4; ++n) {
        const auto occs = occupations(3, n);
        for (const auto& a : occs)
            for (const auto& b : occs) {
                const double ref = oracle::permutation_sum_inner(a, b, std::pow(w(n), 2));
                const cplx got = fock_inner(w, FockVector::monomial(a), FockVector::monomial(b));
                CHECK(std::abs(got - ref) <= 1e-12 * std::max(1.0, ref));
            }
    }
}

TEST_CASE("occupations") {
    const auto o = occupations(3, 2);
    REQUIRE(o.size() == 6);
    CHECK(o.front() == Occupation{2, 0, 0});
    CHECK(o.back() == Occupation{0, 0, 2});
}

TEST_CASE("symmetric product matches the tensor symmetrisation") {
    const FockWeight w(1.0, 0.5, 6);
    const std::size_t m = 3;
    for (int r = 0; r < 5; ++r) {
        const auto u = random_fock(m, 2), v = random_fock(m, 2);
        const auto uv = sym_product(w, u, v).value;
        for (int n = 0; n <= 4; ++n) {
            Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(std::pow(m, n)));
            for (int a = 0; a <= n; ++a) {
                if (a > 2 || n - a > 2) continue;
                ref += symmetrize(kron(to_tensor(u, a), to_tensor(v, n - a)), m, n);
            }
            CHECK((to_tensor(uv, n) - ref).norm() <= 1e-12 * std::max(1.0, ref.norm()));
        }
    }
    // ζ_1 ∨ ζ_1 is the plain tensor square
    const auto z = FockVector::mode(2, 1);
    const auto zz = sym_product(w, z, z).value;
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(2);
    e1(1) = 1.0;
    CHECK((to_tensor(zz, 2) - kron(e1, e1)).norm() == 0.0);
}

TEST_CASE("symmetric product algebra") {
    const FockWeight w(1.0, 0.5, 6);
    const auto omega = FockVector::vacuum(3);
    const auto v = random_fock(3, 3);
    CHECK(distance(w, sym_product(w, omega, v).value, v) == 0.0);
    const auto z1 = FockVector::mode(3, 1), z2 = FockVector::mode(3, 2);
    CHECK(distance(w, sym_product(w, z1, z2).value, sym_product(w, z2, z1).value) == 0.0);

    const auto a = random_fock(3, 2), b = random_fock(3, 2), c = random_fock(3, 2);
    const auto left = sym_product(w, sym_product(w, a, b).value, c).value;
    const auto right = sym_product(w, a, sym_product(w, b, c).value).value;
    CHECK(distance(w, left, right) <= 1e-12 * fock_norm(w, left));

    // truncation reports the discarded grading
    const FockWeight small(1.0, 0.5, 2);
    const auto t = sym_product(small, FockVector::mode(3, 1) + FockVector::vacuum(3), sym_product(small, z1, z1).value);
    CHECK(t.value.max_grading() <= 2);
    CHECK(t.discarded_norm_sq == doctest::Approx(std::pow(small(3), 2)).epsilon(1e-14));

    // Hilbert-norm submultiplicativity surrogate: ratio bounded by Σ w^{-2}
    double worst = 0.0;
    for (int r = 0; r < 20; ++r) {
        const auto p = random_fock(3, 3), q = random_fock(3, 3);
        worst = std::max(worst, fock_norm(w, sym_product(w, p, q).value) / (fock_norm(w, p) * fock_norm(w, q)));
    }
    double bound = 0.0;
    for (int n = 0; n <= 6; ++n) bound += w.inv_sq(n);
    CHECK(worst <= bound * 8.0);
}

TEST_CASE("lifted generator and evolution") {
    const FockWeight w(1.0, 0.5, 6);
    const auto modes = toy_modes(3);
    CHECK(fock_norm(w, lifted_generator_apply(modes, FockVector::vacuum(3))) == 0.0);
    const auto z1 = FockVector::mode(3, 1), z2 = FockVector::mode(3, 2);
    CHECK(std::abs(lifted_generator_apply(modes, z1).amplitude({0, 1, 0}) - cplx(0, modes.omega[1])) <= 1e-15);
    const auto z12 = sym_product(w, z1, z2).value;
    const cplx expect = cplx(0, modes.omega[1] + modes.omega[2]) * z12.amplitude({0, 1, 1});
    CHECK(std::abs(lifted_generator_apply(modes, z12).amplitude({0, 1, 1}) - expect) <= 1e-15);

    for (int r = 0; r < 10; ++r) {
        const auto u = random_fock(3, 3), v = random_fock(3, 3);
        const auto lhs = lifted_generator_apply(modes, sym_product(w, u, v).value);
        const auto rhs = sym_product(w, lifted_generator_apply(modes, u), v).value +
                         sym_product(w, u, lifted_generator_apply(modes, v)).value;
        CHECK(distance(w, lhs, rhs) <= 1e-12 * std::max(1.0, fock_norm(w, lhs)));

        const double t = oracle::uniform(-5, 5);
        CHECK(distance(w, lifted_evolve(modes, u, 0.0), u) == 0.0);
        const auto m1 = lifted_evolve(modes, sym_product(w, u, v).value, t);
        const auto m2 = sym_product(w, lifted_evolve(modes, u, t), lifted_evolve(modes, v, t)).value;
        CHECK(distance(w, m1, m2) <= 1e-12 * std::max(1.0, fock_norm(w, m1)));
        for (int n = 0; n <= 3; ++n)
            CHECK(fock_norm(w, lifted_evolve(modes, u, t).grading_part(n)) ==
                  doctest::Approx(fock_norm(w, u.grading_part(n))).epsilon(1e-12));
    }
}

TEST_CASE("spectrum torus rotation and duality") {
    const FockWeight w;
    const auto modes = toy_modes(4);
    const auto pt = random_point(4, 0.8);
    const auto same = spectrum_rotate(pt, modes, 0.0);
    CHECK((same.z - pt.z).norm() == 0.0);
    CHECK((same.a - pt.a).norm() == 0.0);
    const auto st = spectrum_rotate(spectrum_rotate(pt, modes, 0.4), modes, 1.1);
    CHECK((st.z - spectrum_rotate(pt, modes, 1.5).z).cwiseAbs().maxCoeff() <= 1e-15);

    for (int r = 0; r < 20; ++r) {
        const auto p = random_point(4, oracle::uniform(0.1, 1.0));
        const auto v = random_fock(4, 3);
        const double t = oracle::uniform(-10, 10);
        const cplx lhs = gelfand_eval(w, p, lifted_evolve(modes, v, t));
        const cplx rhs = gelfand_eval(w, spectrum_rotate(p, modes, t), v);
        CHECK(std::abs(lhs - rhs) <= 1e-10);
    }

    SpectrumTorusPoint bad = pt;
    bad.z(0) *= 1.1;
    CHECK_THROWS_AS(validate(bad), DomainError);
    bad = pt;
    bad.a *= 2.0;
    CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("Gelfand evaluation") {
    const FockWeight w;
    const auto pt = random_point(3, 0.9);
    CHECK(std::abs(gelfand_eval(w, pt, FockVector::vacuum(3)) - cplx(1.0)) <= 1e-15);

    SpectrumTorusPoint zero = pt;
    zero.a.setZero();
    const auto v = random_fock(3, 3);
    CHECK(std::abs(gelfand_eval(w, zero, v) - v.amplitude({0, 0, 0})) <= 1e-15);

    for (int r = 0; r < 20; ++r) {
        const auto u = random_fock(3, 3), s = random_fock(3, 3);
        const auto p = random_point(3, oracle::uniform(0.1, 1.0));
        const cplx a = gelfand_eval(w, p, sym_product(w, u, s).value);
        CHECK(std::abs(a - gelfand_eval(w, p, u) * gelfand_eval(w, p, s)) <= 1e-8 * std::max(1.0, std::abs(a)));
    }

    const auto xi = xi_series(w, pt);
    CHECK(xi.tail_bound == doctest::Approx(w.tail_series(pt.a.norm())).epsilon(1e-15));
    CHECK(xi.tail_bound < 1e-3);
}

TEST_CASE("second-quantization forecast") {
    const dynamics::RotationSystem sys({1.0});
    const rkha::TruncatedLattice lat(1, 8);
    const auto gen = spectral::analytic_generator(sys, lat);
    const TorusPoint x({1.0});
    ForecastParams fp;

    const auto c = FourierObservable::constant(1, 2.5);
    for (double t : {0.0, 1.0, 3.0}) {
        fp.m = 2;
        CHECK(second_quantization_forecast(c, gen, fp, x, t).value == doctest::Approx(2.5).epsilon(1e-14));
    }

    // Quadrature oracle: ∫ f(y) s(x + t - y)^m dy / ∫ s(x + t - y)^m dy with
    // s(u) = Σ_{|j|<=3} λ_σ(j) κ̂(j) e^{iju}, the seven modes in use.
    const auto f = FourierObservable::cosine(1);
    auto oracle_value = [&](int m, double t) {
        auto s = [&](double u) {
            double v = 0.0;
            for (int j = -3; j <= 3; ++j) v += oracle::lambda(fp.sigma, fp.p, j) * kernel_coefficient(fp.kernel_kappa, j) * std::cos(j * u);
            return v;
        };
        double num = 0.0, den = 0.0;
        const int n = 400;
        for (int k = 0; k < n; ++k) {
            const double y = two_pi * k / n;
            const double sm = std::pow(s(x[0] + t - y), m);
            num += std::cos(y) * sm;
            den += sm;
        }
        return num / den;
    };
    std::vector<double> err;
    for (int m : {1, 2, 3}) {
        fp.m = m;
        const auto r = second_quantization_forecast(f, gen, fp, x, 1.0);
        CHECK(r.value == doctest::Approx(oracle_value(m, 1.0)).epsilon(1e-10));
        err.push_back(std::abs(r.value - std::cos(2.0)));
    }
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);

    fp.m = 1;
    const auto r0 = second_quantization_forecast(f, gen, fp, x, 0.0);
    CHECK(r0.value == doctest::Approx(oracle_value(1, 0.0)).epsilon(1e-10));

    fp.m = 7;
    CHECK_THROWS_AS(second_quantization_forecast(f, gen, fp, x, 1.0), DomainError);
    fp.m = 1;
    fp.tau = 0.2;
    CHECK_THROWS_AS(second_quantization_forecast(f, gen, fp, x, 1.0), DomainError);
}

TEST_CASE("tensor-network expectation") {
    const dynamics::RotationSystem sys({1.0});
    const rkha::TruncatedLattice lat(1, 32);
    const auto gen = spectral::analytic_generator(sys, lat);
    const TorusPoint x({1.0});
    TensorNetworkParams tp;

    const auto one = FourierObservable::constant(1, 1.0);
    for (int n = 1; n <= 3; ++n) {
        tp.n = n;
        for (double t : {0.0, 0.5, 2.0, 17.0}) CHECK(tensor_network_expectation(one, gen, x, tp, t).value == 1.0);
    }

    // t = 0, n = 1 against dense quadrature of the untruncated von Mises state
    const auto f = FourierObservable::cosine(1);
    tp.n = 1;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 4096; ++k) {
        const double y = two_pi * k / 4096;
        const double p = std::exp(tp.kappa * std::cos(y - x[0]));
        num += std::cos(y) * p * p;
        den += p * p;
    }
    CHECK(std::abs(tensor_network_expectation(f, gen, x, tp, 0.0).value - num / den) <= 1e-8);

    for (double t : {0.0, 1.0, 2.0}) {
        tp.n = 1;
        const double v1 = tensor_network_expectation(f, gen, x, tp, t).value;
        for (int n : {2, 3}) {
            tp.n = n;
            const auto r = tensor_network_expectation(f, gen, x, tp, t);
            CHECK(std::abs(r.value - v1) <= r.truncation_bound);
        }
    }

    tp.n = 4;
    CHECK_THROWS_AS(tensor_network_expectation(f, gen, x, tp, 0.0), DomainError);
}

}
