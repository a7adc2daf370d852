#include "doctest.h"
#include "rfhlab/errors.hpp"
#include "rfhlab/symlin.hpp"

#include <random>

using namespace rfh;

TEST_CASE("standard structure m=1 entries and omega")
{
    auto s = standard_structure(1);
    Mat expected(2, 2);
    expected << 0, -1, 1, 0;
    CHECK(s.J == expected);
    Vec u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    CHECK(s.omega(u, v) == -1.0);
}

TEST_CASE("standard structure squares to minus identity and is compatible")
{
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    for (int m = 1; m <= 4; ++m) {
        auto s = standard_structure(m);
        CHECK((s.J * s.J + Mat::Identity(2 * m, 2 * m)).cwiseAbs().maxCoeff() == 0.0);
        Vec u(2 * m), v(2 * m);
        for (int i = 0; i < 2 * m; ++i) { u[i] = nd(rng); v[i] = nd(rng); }
        CHECK(s.omega(u, v) == doctest::Approx(-s.omega(v, u)));
        CHECK(s.omega(s.J * u, s.J * v) == doctest::Approx(s.omega(u, v)));
    }
    CHECK_THROWS_AS(standard_structure(0), ConfigError);
}

TEST_CASE("signature basics")
{
    Mat a(2, 2);
    a << 3.0, 2.0, 2.0, 0.0;
    CHECK(signature(SymmetricForm(a)) == 0);
    CHECK(signature(SymmetricForm(Mat::Identity(5, 5))) == 5);
    CHECK(signature(SymmetricForm(Mat::Zero(3, 3))) == 0);
    CHECK_THROWS_AS(signature(SymmetricForm(Mat::Zero(3, 3)), 1e-9, true), DegenerateForm);
}

TEST_CASE("signature is a congruence invariant and odd under negation")
{
    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        int k = 1 + trial % 6;
        Mat f(k, k), A(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) { f(i, j) = nd(rng); A(i, j) = nd(rng); }
        SymmetricForm F(f);
        if (std::abs(A.determinant()) < 1e-3) continue;
        int s = signature(F);
        CHECK(signature(SymmetricForm(A.transpose() * F.entries() * A)) == s);
        CHECK(signature(-F) == -s);
    }
}

TEST_CASE("is_symplectic examples")
{
    CHECK(is_symplectic(Mat::Identity(2, 2), 1e-12));
    Mat J = standard_j(1);
    for (double t : {0.1, 1.0, 2.5, -4.0}) {
        Mat r = std::cos(t) * Mat::Identity(2, 2) + std::sin(t) * J;
        CHECK(is_symplectic(r, 1e-12));
    }
    CHECK_FALSE(is_symplectic(2.0 * Mat::Identity(2, 2), 1e-6));
    CHECK_THROWS_AS(is_symplectic(Mat::Identity(3, 3), 1e-6), ConfigError);
    CHECK_THROWS_AS(SymplecticMatrix(2.0 * Mat::Identity(2, 2), 1e-6), InvariantError);
}
