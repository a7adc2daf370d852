#include "doctest.h"
#include "rfhlab/errors.hpp"
#include "rfhlab/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace rfh;

namespace {
Vec unit(int d, int i)
{
    Vec v = Vec::Zero(d);
    v[i] = 1;
    return v;
}
// Polygon quadrature of int x^* lambda = (1/2) int (x dy - y dx), midpoint rule on chords.
double lambda_area(const ModelSystem& sys, const ReebOrbitFamily& f, int m)
{
    double a = 0;
    for (int i = 0; i < m; ++i) {
        Vec p = f.point(sys, double(i) / m), q = f.point(sys, double(i + 1) / m);
        a += sys.lambda(0.5 * (p + q), q - p);
    }
    return a;
}
}

TEST_CASE("profile is C2, increasing, constant and positive on the plateau")
{
    Profile p;
    CHECK(p.h(1.0) == 0.0);
    CHECK(p.dh(1.0) > 0);
    CHECK(p.d2h(1.0) != 0);
    const double e = 1e-7;
    for (double r : {p.r1, p.r2}) {
        CHECK(std::abs(p.h(r - e) - p.h(r + e)) <= 2 * e * p.r1 + 1e-13);
        CHECK(std::abs(p.dh(r - e) - p.dh(r + e)) <= 2 * e * 2 + 1e-13);
        CHECK(std::abs(p.d2h(r - e) - p.d2h(r + e)) <= 1e-5);
    }
    for (double r = 0.05; r < 2.0; r += 0.01) {
        CHECK(p.dh(r) >= 0);
        // finite-difference consistency of the three pieces
        CHECK((p.h(r + 1e-6) - p.h(r - 1e-6)) / 2e-6 == doctest::Approx(p.dh(r)).epsilon(1e-6));
    }
    CHECK(p.h(2.0) == p.h(1.5));
    CHECK(p.h(2.0) > 0);
}

TEST_CASE("model derived constants")
{
    auto sys = make_model(1);
    // lambda(X_H) = r h'(r)/2 = r^2/2 on N, smallest at r^2 = 1 - 2 h_thr
    CHECK(sys.alpha0 == doctest::Approx(0.5 * (1 - 2 * sys.h_thr)).epsilon(1e-6));
    CHECK(sys.h_thr <= sys.alpha0 / 3);
    CHECK(sys.sup_XH() >= sys.profile.r1);
    auto back = ModelSystem::from_json(sys.to_json());
    CHECK(back.n == sys.n);
    CHECK(back.profile.r2 == sys.profile.r2);
    CHECK_THROWS_AS(make_model(4), ConfigError);
    CHECK_THROWS_AS(ModelSystem::from_json("{bad"), ConfigError);
}

TEST_CASE("hamiltonian data examples")
{
    auto sys = make_model(2);
    Vec x = unit(4, 0);
    auto d = hamiltonian_data(sys, {x, 3.0, 1.0});
    CHECK(d.Ht == 0.0);
    CHECK(d.dsigma == 0.0);
    Vec y = 0.5 * unit(4, 1);
    auto d0 = hamiltonian_data(sys, {y, 0.0, 2.0});
    CHECK(d0.dx.norm() == 0.0);
    CHECK(d0.dsigma == doctest::Approx(sys.H(y)));
    // flow formula against RK4 of the extended system
    ExtendedPoint p{Vec(0.8 * unit(4, 0) + 0.3 * unit(4, 3)), 1.7, 0.4};
    auto q = extended_flow(sys, p, 0.9);
    auto traj = integrate_XH(sys, p.x, p.tau * 0.9, 2000);
    CHECK((q.x - traj.back()).norm() < 1e-9);
    CHECK(q.sigma == doctest::Approx(p.sigma + 0.9 * sys.H(p.x)));
}

TEST_CASE("energy is conserved along X_H trajectories")
{
    auto sys = make_model(1);
    for (double r : {0.5, 1.0, 1.3, 1.45}) {
        Vec x0 = r * unit(2, 0);
        auto traj = integrate_XH(sys, x0, 10.0, 10000);
        double drift = 0;
        for (const Vec& x : traj) drift = std::max(drift, std::abs(sys.H(x) - sys.H(x0)));
        CHECK(drift / 10.0 <= 1e-8);
    }
}

TEST_CASE("lambda(X_H) bounded below on N")
{
    auto sys = make_model(2);
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    int hits = 0;
    for (int i = 0; i < 2000; ++i) {
        Vec x(4);
        for (int j = 0; j < 4; ++j) x[j] = nd(rng);
        x *= (0.85 + 0.3 * (i % 100) / 100.0) / x.norm();
        if (std::abs(sys.H(x)) > sys.h_thr) continue;
        ++hits;
        CHECK(sys.lambda(x, sys.X_H(x)) >= sys.alpha0 - 1e-12);
    }
    CHECK(hits > 100);
}

TEST_CASE("reeb orbit families")
{
    auto sys = make_model(1);
    auto c = reeb_orbits(sys, 0.0);
    CHECK(c.constants);
    CHECK(c.dim_critical == 2 * sys.n);
    const double T = sys.base_period();
    auto f = reeb_orbits(sys, T);
    CHECK(f.k == 1);
    // area enclosed by the unit circle
    CHECK(lambda_area(sys, f, 4000) == doctest::Approx(std::numbers::pi).epsilon(1e-6));
    CHECK(f.action == doctest::Approx(std::numbers::pi));
    CHECK(reeb_orbits(sys, 1.5 * T).empty);
    CHECK(reeb_orbits(sys, -2 * T).k == -2);
    for (int k : {1, 2, -1}) {
        auto g = reeb_orbits(sys, k * T);
        for (double t = 0; t <= 1.0; t += 0.125) {
            Vec x = g.point(sys, t);
            CHECK(std::abs(sys.H(x)) < 1e-14);
            // fixed point of the extended time-1 map, and x' = tau X_H
            Vec fd = (g.point(sys, t + 1e-6) - g.point(sys, t - 1e-6)) / 2e-6;
            CHECK((fd - g.tau * sys.X_H(x)).norm() < 1e-6);
        }
        auto q = extended_flow(sys, {g.x0, g.tau, 0.3}, 1.0);
        CHECK((q.x - g.x0).norm() < 1e-12);
        CHECK(q.sigma == doctest::Approx(0.3));
        // sigma shift maps orbits to orbits
        auto q2 = extended_flow(sys, {g.x0, g.tau, 5.3}, 1.0);
        CHECK((q2.x - q.x).norm() == 0.0);
        CHECK(q2.sigma - q.sigma == doctest::Approx(5.0));
    }
}

TEST_CASE("linearized flow index is 2nk and matches the block route")
{
    for (int n = 1; n <= 3; ++n) {
        auto sys = make_model(n);
        for (int k : {1, 2}) {
            auto p = linearized_flow_path(sys, k);
            p.validate(1e-8);
            auto mu = rs_index(p);
            INFO("n=" << n << " k=" << k << " mu=" << mu.str());
            CHECK(mu == HalfInteger::from_int(2 * n * k));
            if (n >= 2) {
                auto b = block_diag(contact_block_path(n, k), theta_path(2 * std::numbers::pi * k, 1, 1));
                INFO("block route " << rs_index(b).str());
                CHECK(rs_index(b) == mu);
            }
        }
    }
}
