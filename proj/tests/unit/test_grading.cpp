#include "doctest.h"
#include "rfhlab/errors.hpp"
#include "rfhlab/grading.hpp"

#include <random>

using namespace rfh;

namespace {
CriticalComponent constants(int n)
{
    CriticalComponent c;
    c.id = "const";
    c.kind = ComponentKind::constants;
    c.n = n;
    c.dimK = 2 * n - 1;
    c.mu_rs = HalfInteger{0};
    return c;
}
}

TEST_CASE("mu values for the constants component")
{
    for (int n = 1; n <= 3; ++n) {
        auto c = constants(n);
        CHECK(mu_lambda(c) == -n);
        CHECK(mu_K(c) == 1 - n);
        CHECK(mu_lambda(c) == mu_K(c) - 1);
    }
    CHECK(mu_K(constants(1)) == 0);
    CHECK(mu_K(constants(3)) == -2);
}

TEST_CASE("mu arithmetic examples")
{
    CriticalComponent c;
    c.id = "x";
    c.dimK = 2;
    c.mu_rs = HalfInteger{3};
    CHECK(mu_lambda(c) == 0);
    CriticalComponent o;
    o.id = "o";
    o.dimK = 1;
    o.mu_rs = HalfInteger::from_int(2);
    CHECK(mu_K(o) == 2);
    CriticalComponent bad;
    bad.id = "bad";
    bad.dimK = 1;
    bad.mu_rs = HalfInteger{1};
    CHECK_THROWS_AS(mu_lambda(bad), InvariantError);
}

TEST_CASE("model components satisfy the index relations")
{
    for (int n = 1; n <= 3; ++n) {
        auto comps = model_components(make_model(n), 2);
        REQUIRE(comps.size() == 5);
        for (const auto& c : comps) {
            CHECK(mu_lambda(c) == mu_K(c) - 1);
            for (const auto& g : sphere_generators(c)) CHECK(g.mu_f == g.mu_f_RF);
            if (c.kind == ComponentKind::orbit) {
                int k = std::stoi(c.id.substr(5));
                CHECK(mu_K(c) == 2 * n * k - (n - 1));
            }
        }
        // degrees of consecutive components interleave: top of one sits one below the bottom of the next
        for (size_t i = 0; i + 1 < comps.size(); ++i) {
            auto a = sphere_generators(comps[i]), b = sphere_generators(comps[i + 1]);
            CHECK(b[0].mu_f - a[1].mu_f == 1);
        }
    }
}

TEST_CASE("dimension formulas: examples and cross identity")
{
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> ui(-6, 6), dk(0, 5);
    for (int trial = 0; trial < 200; ++trial) {
        CriticalComponent a, b;
        a.id = "a";
        b.id = "b";
        a.dimK = dk(rng);
        b.dimK = dk(rng);
        // mu_rs parity so that mu(Lambda) and mu(K) are integers: mu_rs = dimLambda/2 mod 1
        a.mu_rs = HalfInteger{2 * ui(rng) + a.dimLambda()};
        b.mu_rs = HalfInteger{2 * ui(rng) + b.dimLambda()};
        std::uniform_int_distribution<int> ia(0, a.dimK), ib(0, b.dimK);
        Endpoint A{a, {}}, B{b, {}}, xa{a, ia(rng)}, xb{b, ib(rng)};
        for (auto mode : {CascadeMode::extended, CascadeMode::rabinowitz}) {
            CHECK(cascade_dims(mode, xa, xb) ==
                  cascade_dims(mode, xa, B) + cascade_dims(mode, A, xb) - cascade_dims(mode, A, B));
        }
        auto ga = make_generator(a, *xa.ind_f), gb = make_generator(b, *xb.ind_f);
        CHECK(cascade_dims(CascadeMode::extended, xa, xb) == ga.mu_f - gb.mu_f);
        CHECK(cascade_dims(CascadeMode::rabinowitz, xa, xb) == ga.mu_f_RF - gb.mu_f_RF - 1);
        CHECK(cascade_dims(CascadeMode::hybrid, xa, xa) == 0);
        // Lambda = preimage of K: stationary family has dimension dim Lambda
        CHECK(cascade_dims(CascadeMode::hybrid, A, A) == a.dimLambda());
        CHECK(cascade_dims(CascadeMode::hybrid, xa, xb) ==
              cascade_dims(CascadeMode::hybrid, xa, B) + cascade_dims(CascadeMode::hybrid, A, xb) -
                  cascade_dims(CascadeMode::hybrid, A, B));
        CHECK(cascade_dims(CascadeMode::hybrid, xa, B) == ga.mu_f_RF - mu_lambda(b));
    }
}

TEST_CASE("fredholm index: cylinder and hybrid branches")
{
    CHECK(fredholm_index_cylinder(3, 3, 4) == -4);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> ui(-10, 10), dl(1, 6), nn(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        int muK = ui(rng), muL = ui(rng), dL = dl(rng), n = nn(rng);
        auto p = fredholm_index_hybrid(hybrid_branch_data(muK, muL, dL, n, +1));
        auto m = fredholm_index_hybrid(hybrid_branch_data(muK, muL, dL, n, -1));
        CHECK(p.k == HalfInteger{0});
        CHECK(p.total == m.total);
        CHECK(p.total == muK - muL - dL);
    }
    HybridIndexData d;
    CHECK_THROWS_AS(fredholm_index_hybrid(d), ConfigError);
}

TEST_CASE("model orbit pair: hybrid index against cascade dimension")
{
    auto comps = model_components(make_model(2), 1);
    for (const auto& c : comps) {
        int total = fredholm_index_hybrid(hybrid_branch_data(mu_K(c), mu_lambda(c), c.dimLambda(), c.n, 1)).total;
        Endpoint K{c, {}};
        CHECK(total == cascade_dims(CascadeMode::hybrid, K, K) - c.dimK - c.dimLambda());
    }
}

TEST_CASE("component table json round trip and report")
{
    auto comps = model_components(make_model(1), 1);
    auto back = components_from_json(components_to_json(comps));
    REQUIRE(back.size() == comps.size());
    for (size_t i = 0; i < comps.size(); ++i) CHECK(back[i].mu_rs == comps[i].mu_rs);
    auto csv = grading_report_csv(comps);
    CHECK(csv.find("const,constants,0,1,2,0,0,-1,const:min,0,0,0") != std::string::npos);
    CHECK_THROWS_AS(components_from_json("[{\"id\":\"a\"}]"), ConfigError);
}
