#include "oracles.hpp"

#include <doctest.h>
#include <koopq/errors.hpp>
#include <koopq/spectral.hpp>

#include <sstream>

using namespace koopq;
using namespace koopq::spectral;
using dynamics::FourierObservable;

namespace {

FourierObservable random_observable(std::size_t dim, int bw) {
    const rkha::TruncatedLattice lat(dim, bw);
    FourierObservable f(dim);
    for (const auto& j : lat.points()) f.set(j, oracle::gaussian_c());
    return f;
}

double coeff_distance(const FourierObservable& a, const FourierObservable& b, const rkha::TruncatedLattice& lat) {
    return (lat.to_vector(a) - lat.to_vector(b)).norm();
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("analytic generator frequencies") {
    const rkha::TruncatedLattice lat1(1, 4);
    const auto g1 = analytic_generator(RotationSystem({1.0}), lat1);
    CHECK(g1.frequency_at(lat1.zero_index()) == 0.0);
    CHECK(g1.modes()[0].omega == 0.0);

    const rkha::TruncatedLattice lat2(2, 3);
    const auto g2 = analytic_generator(RotationSystem({std::sqrt(2.0), std::sqrt(3.0)}), lat2);
    CHECK(g2.frequency_at(lat2.index_of({1, -1})) == doctest::Approx(std::sqrt(2.0) - std::sqrt(3.0)).epsilon(1e-15));
    for (std::size_t k = 0; k < lat2.size(); ++k) {
        MultiIndex neg = lat2[k];
        for (int& v : neg) v = -v;
        CHECK(g2.frequency_at(lat2.index_of(neg)) == -g2.frequency_at(k));
    }
    CHECK(g2.skew_defect() == 0.0);
}

TEST_CASE("mode ordering") {
    const rkha::TruncatedLattice lat(1, 3);
    const auto g = analytic_generator(RotationSystem({1.0}), lat);
    std::vector<double> om;
    for (const auto& m : g.modes()) om.push_back(m.omega);
    CHECK(om == std::vector<double>{0, 1, -1, 2, -2, 3, -3});
}

TEST_CASE("evolve matches koopman_exact and is unitary") {
    const RotationSystem sys({std::sqrt(2.0), std::sqrt(3.0)});
    const rkha::TruncatedLattice lat(2, 3);
    const auto gen = analytic_generator(sys, lat);
    const auto f = random_observable(2, 3);
    CHECK(coeff_distance(evolve(gen, f, 0.0), f, lat) == 0.0);
    for (double t : {0.1, 1.0, 10.0}) {
        const auto e = evolve(gen, f, t);
        CHECK(coeff_distance(e, dynamics::koopman_exact(f, sys, t), lat) <= 1e-12);
        CHECK(e.l2_norm() == doctest::Approx(f.l2_norm()).epsilon(1e-12));
    }
    FourierObservable outside(2);
    outside.set({4, 0}, 1.0);
    CHECK_THROWS_AS(evolve(gen, outside, 1.0), OutOfLatticeError);
}

TEST_CASE("group law and reality for both kinds") {
    const RotationSystem sys({1.0});
    const auto traj = dynamics::sample_trajectory(sys, TorusPoint({0.3}), 0.01, 2000);
    const rkha::TruncatedLattice lat(1, 3);
    const auto dd = data_driven_generator(traj, 0.01, lat);
    const auto an = analytic_generator(sys, lat);
    for (const GeneratorSpec* g : {&an, &dd}) {
        const auto f = random_observable(1, 3);
        const double s = 0.7, t = -2.3;
        CHECK(coeff_distance(evolve(*g, evolve(*g, f, s), t), evolve(*g, f, s + t), lat) <= 1e-11);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(g->matrix());
        CHECK(es.eigenvalues().real().cwiseAbs().maxCoeff() <= 1e-10);

        FourierObservable real_f(1);
        for (int j = 0; j <= 3; ++j) {
            const cplx c = oracle::gaussian_c();
            real_f.set({j}, j == 0 ? cplx(c.real()) : c);
            if (j) real_f.set({-j}, std::conj(c));
        }
        CHECK(evolve(*g, real_f, 1.7).is_real(1e-12));
    }
}

TEST_CASE("smoothed generator residual") {
    const rkha::TruncatedLattice lat(1, 10);
    const auto gen = analytic_generator(RotationSystem({1.0}), lat);
    const rkha::SubexpWeight w(0.5, 0.5, 1);
    const auto f = random_observable(1, 10);
    CHECK(smoothing_residual(w, gen, f, 0.0) <= 1e-15);
    for (double t : {0.1, 1.0, 10.0}) CHECK(smoothing_residual(w, gen, f, t) <= 1e-12);
    CHECK(smoothing_residual(w, gen, FourierObservable::constant(1, 3.0), 4.0) == 0.0);
}

TEST_CASE("data-driven generator recovers the rotation") {
    const RotationSystem sys({1.0});
    const auto traj = dynamics::sample_trajectory(sys, TorusPoint({0.0}), 0.01, 5000);
    const rkha::TruncatedLattice lat(1, 3);
    const auto gen = data_driven_generator(traj, 0.01, lat);
    CHECK(gen.kind() == GeneratorKind::DataDriven);

    const auto& m = gen.modes();
    CHECK(m[0].omega == 0.0);
    CHECK(std::abs(m[1].omega - 1.0) <= 1e-3);
    CHECK(m[2].omega == doctest::Approx(-m[1].omega).epsilon(1e-12));

    const Eigen::MatrixXcd& a = gen.matrix();
    CHECK((a + a.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.col(static_cast<Eigen::Index>(lat.zero_index())).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.row(static_cast<Eigen::Index>(lat.zero_index())).cwiseAbs().maxCoeff() == 0.0);

    std::ostringstream out;
    write_frequency_csv(out, gen, analytic_generator(sys, lat));
    std::string header;
    std::istringstream in(out.str());
    std::getline(in, header);
    CHECK(header == "index,omega,abs_error_vs_analytic");
}

TEST_CASE("data-driven generator rejects short trajectories") {
    const RotationSystem sys({1.0});
    const auto traj = dynamics::sample_trajectory(sys, TorusPoint({0.0}), 0.01, 6);
    const rkha::TruncatedLattice lat(1, 3);
    try {
        (void)data_driven_generator(traj, 0.01, lat);
        FAIL("expected a rank deficiency");
    } catch (const RankDeficiencyError& e) {
        CHECK(e.deficient_count() > 0);
    }
    CHECK_THROWS_AS(data_driven_generator({traj[0], traj[1]}, 0.01, lat), DomainError);
}

}
