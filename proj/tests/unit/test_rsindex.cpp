#include "doctest.h"
#include "rfhlab/errors.hpp"
#include "rfhlab/rsindex.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <random>

using namespace rfh;

namespace {

// Independent count for t -> exp(2 pi w t J): kernel is all of R^2 exactly when
// w t is an integer, and the crossing form there is 2 pi w I.
int rotation_twice_index(double w)
{
    if (w == 0) return 0;
    int sgn = w > 0 ? 1 : -1;
    double a = std::abs(w);
    int full = static_cast<int>(std::floor(a));
    bool end_hit = std::abs(a - std::round(a)) < 1e-12;
    int interior = end_hit ? static_cast<int>(std::round(a)) - 1 : full;
    int twice = 2 /* t=0 */ + 4 * interior + (end_hit ? 2 : 0);
    return sgn * twice;
}

Mat random_symmetric(std::mt19937& rng, int d, double scale)
{
    std::normal_distribution<double> nd(0.0, scale);
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = nd(rng);
    return 0.5 * (a + a.transpose());
}

SymplecticPath random_path(std::mt19937& rng, int m)
{
    const int d = 2 * m;
    Mat A = random_symmetric(rng, d, 4.0), B = random_symmetric(rng, d, 4.0), C = random_symmetric(rng, d, 3.0);
    return integrate_generator(standard_j(m), [=](double t) { return Mat(A + t * B + std::sin(2 * std::numbers::pi * t) * C); },
                               200);
}

Mat random_symplectic(std::mt19937& rng, int m)
{
    Mat S = random_symmetric(rng, 2 * m, 0.5);
    return Mat((standard_j(m) * S).exp());
}

}

TEST_CASE("half integer arithmetic")
{
    HalfInteger a{3}, b{1};
    CHECK((a + b) == HalfInteger::from_int(2));
    CHECK((a - b).twice_value == 2);
    CHECK(a.str() == "3/2");
    CHECK(HalfInteger::from_int(-2).str() == "-2");
    CHECK_THROWS_AS(a.as_integer(), InvariantError);
}

TEST_CASE("constant identity path has index zero")
{
    for (int m = 1; m <= 3; ++m) CHECK(rs_index(identity_path(m)) == HalfInteger{0});
}

TEST_CASE("rotation paths against crossing count")
{
    for (double w : {1.0, 2.0, 3.0, 0.5, 1.5, 2.25, -1.0, -2.5}) {
        INFO("turns " << w);
        CHECK(rs_index(rotation_path(w)).twice_value == rotation_twice_index(w));
    }
    CHECK(rs_index(rotation_path(1.0)) == HalfInteger::from_int(2));
}

TEST_CASE("theta path matrix and index")
{
    auto p = theta_path(1, 1, 1);
    Mat e(4, 4);
    e << 1, 1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1;
    CHECK((p.at(1.0) - e).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p.at(0.0) - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    p.validate(1e-12);
    for (double tau : {-2.0, 1.0, 5.0})
        for (double hp : {0.5, 1.0, 2.0})
            for (double hpp : {-1.0, 1.0}) CHECK(rs_index(theta_path(tau, hp, hpp)) == HalfInteger{0});
    CHECK_THROWS_AS(theta_path(1, 0, 1), ConfigError);
    CHECK_THROWS_AS(theta_path(1, -1, 1), ConfigError);
}

TEST_CASE("perturbation of the theta path shifts the index by -sgn(delta)")
{
    auto p = theta_path(2 * std::numbers::pi, 1, 1);
    auto base = rs_index(p);
    for (double d : {1e-3, -1e-3, 1e-2, -1e-2}) {
        auto q = perturbed_path(p, d);
        q.validate(1e-9);
        CHECK((rs_index(q) - base) == HalfInteger::from_int(d > 0 ? -1 : 1));
    }
    auto q0 = perturbed_path(p, 0.0);
    for (double t : {0.0, 0.3, 1.0}) CHECK((q0.at(t) - p.at(t)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("perturbation needs a generator")
{
    std::vector<double> t{0.0, 0.5, 1.0};
    std::vector<Mat> s{Mat::Identity(2, 2), rotation_path(0.1).at(0.5), rotation_path(0.1).at(1.0)};
    auto p = interpolated_path(standard_j(1), t, s);
    CHECK_THROWS_AS(perturbed_path(p, 1e-3), ConfigError);
}

TEST_CASE("block diagonal examples")
{
    CHECK(rs_index(block_diag(identity_path(1), identity_path(1))) == HalfInteger{0});
    CHECK(rs_index(block_diag(rotation_path(1), rotation_path(1))) == HalfInteger::from_int(4));
    CHECK(rs_index(block_diag(rotation_path(1), theta_path(1, 1, 1))) == HalfInteger::from_int(2));
}

TEST_CASE("block diagonal shift is the sum of the block shifts")
{
    auto a = rotation_path(1.0);
    auto b = theta_path(2 * std::numbers::pi, 1, 1);
    const double d = 1e-3;
    auto shift = [d](const SymplecticPath& p) { return rs_index(perturbed_path(p, d)) - rs_index(p); };
    CHECK(shift(block_diag(a, b)) == shift(a) + shift(b));
}

TEST_CASE("random paths: additivity, conjugation, catenation")
{
    std::mt19937 rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto p = random_path(rng, 1 + trial % 2);
        auto q = random_path(rng, 1);
        try {
            auto ip = rs_index(p), iq = rs_index(q);
            CHECK(rs_index(block_diag(p, q)) == ip + iq);
            Mat psi = random_symplectic(rng, p.dim() / 2);
            CHECK(rs_index(conjugate(p, psi)) == ip);
            for (double a : {0.31, 0.5, 0.77}) {
                Mat G = p.at(a);
                Eigen::JacobiSVD<Mat> svd(G - Mat::Identity(p.dim(), p.dim()));
                if (svd.singularValues().tail(1)(0) < 1e-3) continue;
                CHECK(rs_index(p, 0, a) + rs_index(p, a, 1) == ip);
            }
            ++checked;
        } catch (const IrregularCrossing&) {
        }
    }
    CHECK(checked >= 30);
}

TEST_CASE("csv round trip")
{
    auto p = rotation_path(1.5);
    std::string csv = path_to_csv(p);
    auto q = path_from_csv(csv);
    CHECK(q.times().size() == p.times().size());
    CHECK(rs_index(q) == rs_index(p));
    CHECK_THROWS_AS(path_from_csv("t,a\n0,1,2\n"), ConfigError);
}
