#include "oracles.hpp"

#include <doctest.h>
#include <koopq/dynamics.hpp>
#include <koopq/errors.hpp>

#include <sstream>

using namespace koopq;
using namespace koopq::dynamics;

TEST_SUITE("dynamics") {

TEST_CASE("flow examples") {
    const RotationSystem s1({std::sqrt(2.0)});
    CHECK(flow(s1, TorusPoint({0.5}), 0.0)[0] == 0.5);

    const RotationSystem s2({1.0});
    CHECK(flow(s2, TorusPoint({0.0}), std::numbers::pi)[0] == doctest::Approx(std::numbers::pi).epsilon(1e-15));

    // long double oracle for (10√2 mod 2π, 10√3 mod 2π)
    const RotationSystem s3({std::sqrt(2.0), std::sqrt(3.0)});
    const auto y = flow(s3, TorusPoint({0.0, 0.0}), 10.0);
    const long double tp = 2.0L * 3.14159265358979323846264338327950288L;
    const long double e0 = std::fmod(10.0L * static_cast<long double>(std::sqrt(2.0)), tp);
    const long double e1 = std::fmod(10.0L * static_cast<long double>(std::sqrt(3.0)), tp);
    CHECK(std::abs(y[0] - static_cast<double>(e0)) <= 1e-14);
    CHECK(std::abs(y[1] - static_cast<double>(e1)) <= 1e-14);
}

TEST_CASE("torus points are canonical") {
    const TorusPoint p({-0.1, 7.0, two_pi});
    for (double a : p.angles()) {
        CHECK(a >= 0.0);
        CHECK(a < two_pi);
    }
    const RotationSystem s({-3.7, 11.2, 1e-3});
    for (double t : {-100.0, -1.0, 0.3, 1e6}) {
        const auto q = flow(s, p, t);
        for (double a : q.angles()) {
            CHECK(a >= 0.0);
            CHECK(a < two_pi);
        }
    }
}

TEST_CASE("flow group property") {
    const RotationSystem s({std::sqrt(2.0), std::sqrt(3.0)});
    for (int r = 0; r < 50; ++r) {
        const TorusPoint x({oracle::uniform(0, two_pi), oracle::uniform(0, two_pi)});
        const double a = oracle::uniform(-20, 20), b = oracle::uniform(-20, 20);
        const auto lhs = flow(s, flow(s, x, a), b);
        const auto rhs = flow(s, x, a + b);
        for (std::size_t i = 0; i < 2; ++i) {
            const double d = std::abs(std::remainder(lhs[i] - rhs[i], two_pi));
            CHECK(d <= 1e-12);
        }
    }
}

TEST_CASE("rotation rejects bad frequencies") {
    CHECK_THROWS_AS(RotationSystem({}), DomainError);
    CHECK_THROWS_AS(RotationSystem({1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(RotationSystem({std::nan("")}), DomainError);
}

TEST_CASE("evaluate") {
    CHECK(evaluate(FourierObservable::constant(2, 1.0), TorusPoint({0.3, 1.1})) == cplx(1.0));
    const auto g1 = FourierObservable::character({1});
    const cplx v = evaluate(g1, TorusPoint({std::numbers::pi / 2}));
    CHECK(std::abs(v - cplx(0, 1)) <= 1e-15);

    // term-by-term summation oracle
    for (int r = 0; r < 20; ++r) {
        FourierObservable f(2);
        std::vector<std::pair<MultiIndex, cplx>> terms;
        for (int a = -3; a <= 3; ++a)
            for (int b = -3; b <= 3; ++b) {
                const cplx c = oracle::gaussian_c();
                f.set({a, b}, c);
                terms.push_back({{a, b}, c});
            }
        const TorusPoint x({oracle::uniform(0, two_pi), oracle::uniform(0, two_pi)});
        std::complex<long double> ref = 0;
        for (const auto& [j, c] : terms) {
            const long double ph = j[0] * static_cast<long double>(x[0]) + j[1] * static_cast<long double>(x[1]);
            ref += std::complex<long double>(c.real(), c.imag()) * std::complex<long double>(std::cos(ph), std::sin(ph));
        }
        const cplx got = evaluate(f, x);
        CHECK(std::abs(got - cplx(static_cast<double>(ref.real()), static_cast<double>(ref.imag()))) <= 1e-14 * 50);
    }
}

TEST_CASE("koopman_exact") {
    const RotationSystem s({1.0});
    const auto g1 = FourierObservable::character({1});
    CHECK(koopman_exact(g1, s, 0.0).coefficient({1}) == cplx(1.0));
    CHECK(std::abs(koopman_exact(g1, s, std::numbers::pi).coefficient({1}) - cplx(-1.0)) <= 1e-15);

    const RotationSystem s2({std::sqrt(2.0), std::sqrt(3.0)});
    for (int r = 0; r < 20; ++r) {
        FourierObservable f(2);
        for (int a = -2; a <= 2; ++a)
            for (int b = -2; b <= 2; ++b) f.set({a, b}, oracle::gaussian_c());
        const TorusPoint x({oracle::uniform(0, two_pi), oracle::uniform(0, two_pi)});
        const double t = oracle::uniform(-5, 5);
        const cplx lhs = evaluate(koopman_exact(f, s2, t), x);
        const cplx rhs = evaluate(f, flow(s2, x, t));
        CHECK(std::abs(lhs - rhs) <= 1e-12);
        CHECK(koopman_exact(f, s2, t).l2_norm() == doctest::Approx(f.l2_norm()).epsilon(1e-15));
    }
}

TEST_CASE("von Mises Fourier coefficients") {
    const auto c0 = von_mises_fourier({{1.0}, {1e-12}}, 4);
    CHECK(std::abs(c0.coefficient({0}) - cplx(1.0)) <= 1e-14);
    CHECK(std::abs(c0.coefficient({1})) <= 1e-11);

    // quadrature oracle for κ = 1, J = 2
    const double mu = 0.7, kappa = 1.0;
    const auto f = von_mises_fourier({{mu}, {kappa}}, 2);
    const double norm = oracle::circle_mean([&](double th) { return cplx(std::exp(kappa * std::cos(th - mu))); }, 256).real();
    for (int j = -2; j <= 2; ++j) {
        const cplx ref = oracle::circle_mean(
            [&](double th) { return std::exp(kappa * std::cos(th - mu)) / norm * std::polar(1.0, -j * th); }, 256);
        CHECK(std::abs(f.coefficient({j}) - ref) <= 1e-10);
    }
    CHECK(f.is_real());

    // density integrates to one and is positive
    const VonMisesDensity p{{0.3, 2.0}, {4.0, 0.5}};
    double s = 0.0;
    const int n = 128;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double v = p(TorusPoint({two_pi * a / n, two_pi * b / n}));
            CHECK(v > 0.0);
            s += v;
        }
    CHECK(s / (n * n) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Bessel ratios against quadrature") {
    for (double kappa : {0.01, 1.0, 10.0, 300.0}) {
        const auto r = bessel_i_ratios(kappa, 12);
        const int n = 2048;
        const double i0 = oracle::circle_mean([&](double th) { return cplx(std::exp(kappa * (std::cos(th) - 1.0))); }, n).real();
        CHECK(bessel_i0_scaled(kappa) == doctest::Approx(i0).epsilon(1e-12));
        for (int j = 0; j <= 12; ++j) {
            const double ij =
                oracle::circle_mean([&](double th) { return cplx(std::exp(kappa * (std::cos(th) - 1.0)) * std::cos(j * th)); }, n).real();
            CHECK(std::abs(r[static_cast<std::size_t>(j)] - ij / i0) <= 1e-12 * std::max(1.0, ij / i0) + 1e-300);
        }
    }
}

TEST_CASE("sample_trajectory") {
    const RotationSystem s({1.0});
    const TorusPoint x0({0.25});
    CHECK(sample_trajectory(s, x0, 0.1, 1) == std::vector<TorusPoint>{x0});
    const auto full = sample_trajectory(s, x0, two_pi, 5);
    REQUIRE(full.size() == 5);
    for (const auto& p : full) CHECK(std::abs(std::remainder(p[0] - x0[0], two_pi)) <= 1e-12);
    const auto tr = sample_trajectory(s, x0, 0.01, 100);
    for (std::size_t n = 0; n < tr.size(); ++n) CHECK(tr[n] == flow(s, x0, 0.01 * static_cast<double>(n)));
    CHECK_THROWS_AS(sample_trajectory(s, x0, 0.0, 3), DomainError);
    CHECK_THROWS_AS(sample_trajectory(s, x0, 0.1, 0), DomainError);
}

TEST_CASE("periodic orbit Koopman matrix is a permutation") {
    for (int m = 1; m <= 8; ++m) {
        const PeriodicOrbitSystem sys(m);
        const Eigen::MatrixXcd u = sys.koopman_matrix();
        CHECK((u * u.transpose() - Eigen::MatrixXcd::Identity(m, m)).norm() == 0.0);
        // (Uf)(i) = f(i+1)
        Eigen::VectorXcd f(m);
        for (int i = 0; i < m; ++i) f(i) = static_cast<double>(i * i);
        const Eigen::VectorXcd g = u * f;
        for (int i = 0; i < m; ++i) CHECK(g(i) == f(sys.step(i)));
    }
}

TEST_CASE("near-rational warning") {
    CHECK(near_rational_warning(RotationSystem({1.0, 0.5})).has_value());
    CHECK_FALSE(near_rational_warning(RotationSystem({std::sqrt(2.0), std::sqrt(3.0)})).has_value());
    CHECK_FALSE(near_rational_warning(RotationSystem({1.0})).has_value());
}

TEST_CASE("trajectory csv") {
    std::ostringstream out;
    write_trajectory_csv(out, {TorusPoint({0.1, 0.2})}, 0.5);
    CHECK(out.str() == "t,theta_0,theta_1\n0,0.10000000000000001,0.20000000000000001\n");
}

}
