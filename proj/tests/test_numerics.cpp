#include "oracles.hpp"

#include <doctest.h>
#include <koopq/csv.hpp>
#include <koopq/numerics.hpp>

using namespace koopq;

TEST_SUITE("numerics") {

TEST_CASE("wrap_angle") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(two_pi) == 0.0);
    CHECK(wrap_angle(-1e-300) < two_pi);
    CHECK(wrap_angle(-0.5) == doctest::Approx(two_pi - 0.5).epsilon(1e-15));
    for (int k = 0; k < 1000; ++k) {
        const double v = wrap_angle(oracle::uniform(-1e4, 1e4));
        CHECK(v >= 0.0);
        CHECK(v < two_pi);
    }
}

TEST_CASE("compensated sums are order independent") {
    std::vector<double> xs;
    for (int k = 0; k < 10000; ++k) xs.push_back(oracle::uniform(-1, 1) * std::pow(10.0, oracle::uniform(-8, 8)));
    CompensatedSum a, b;
    for (double x : xs) a += x;
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) b += *it;
    CHECK(std::abs(a.value() - b.value()) <= 1e-15 * 1e8);
    CompensatedSum c;
    c += 1e16;
    c += 1.0;
    c += -1e16;
    CHECK(c.value() == 1.0);
}

TEST_CASE("psd_sqrt and trace norm") {
    const auto a = oracle::random_psd(7, 4);
    const auto s = psd_sqrt(a);
    CHECK((s * s - a).cwiseAbs().maxCoeff() <= 1e-12 * a.norm());
    Eigen::MatrixXcd h = oracle::random_psd(5, 5) - oracle::random_psd(5, 5);
    h = (h + h.adjoint()).eval() / 2.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
    CHECK(trace_norm(h) == doctest::Approx(svd.singularValues().sum()).epsilon(1e-12));
    Eigen::MatrixXcd g(2, 2);
    g << 0.0, 1.0, 0.0, 0.0;
    CHECK(trace_norm(g) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("expm_skew against the dense exponential") {
    Eigen::MatrixXcd a(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 6; ++k) a(i, k) = oracle::gaussian_c();
    a = (a - a.adjoint()).eval() / 2.0;
    for (double t : {0.0, 0.3, -2.0}) {
        const auto u = expm_skew(a, t);
        CHECK((u - oracle::expm(t * a)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(unitarity_defect(u) <= 1e-13);
    }
}

TEST_CASE("csv formatting") {
    CHECK(csv::fmt(0.1) == "0.10000000000000001");
    CHECK(csv::fmt(1.0) == "1");
    CHECK(csv::hex64(csv::fnv1a64("")) == "cbf29ce484222325");
    CHECK(csv::hex64(csv::fnv1a64("a")) == "af63dc4c8601ec8c");
}

}
