#include "doctest.h"
#include "rfhlab/errors.hpp"
#include "rfhlab/hybrid.hpp"

#include <cmath>
#include <random>

using namespace rfh;

namespace {

HybridState perturbed(const ModelSystem& sys, int N, std::mt19937_64& rng, double eps, double sigma)
{
    FlowProblem R(sys, FlowSystem::rabinowitz, N);
    Vec v = R.flatten(discrete_critical_loop(sys, N, 1));
    std::normal_distribution<double> nd(0.0, 1.0);
    const int d = 2 * sys.n;
    for (int j = 0; j < N; ++j) {
        double th = 2 * M_PI * j / N;
        for (int i = 0; i < d; ++i) v[j * d + i] += eps * (nd(rng) * std::cos(th) + nd(rng) * std::sin(2 * th));
    }
    v[d * N] += eps * nd(rng);
    Vec zeta(N);
    for (int j = 0; j < N; ++j) zeta[j] = sigma + eps * std::sin(2 * M_PI * j / N);
    return coupled_hybrid(sys, R.rabinowitz(v), zeta);
}

}

TEST_CASE("stationary hybrid input is a fixed point")
{
    for (int n : {1, 2}) {
        auto sys = make_model(n);
        auto res = hybrid_relax(sys, stationary_hybrid(sys, 33, 1, 0.3));
        const auto& d = res.diag;
        CHECK(d.converged);
        CHECK(d.sweeps.size() == 1);
        CHECK(d.sweeps[0].datum_change <= 1e-13);
        CHECK(d.minus.steps == 0);
        CHECK(d.plus.steps == 0);
        CHECK(d.sweeps[0].energy_minus == 0.0);
        CHECK(d.sweeps[0].energy_plus == 0.0);
        CHECK(d.max_coupling_residual == 0.0);
        CHECK(d.k == 1);
        CHECK(d.asymptotic_ok);
    }
}

TEST_CASE("perturbed hybrid input relaxes to the stationary family")
{
    auto sys = make_model(1);
    const int N = 33;
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 3; ++trial) {
        auto res = hybrid_relax(sys, perturbed(sys, N, rng, 2e-3, -0.7));
        const auto& d = res.diag;
        REQUIRE(d.converged);
        CHECK(d.sweeps.size() > 1);
        bool moved = false;
        for (const auto& sw : d.sweeps) {
            CHECK(sw.coupling_x <= 1e-12);
            CHECK(sw.coupling_eta <= 1e-12);
            CHECK(std::abs(sw.action_mid_minus - sw.action_mid_plus) <= 1e-12);
            CHECK(sw.action_minus_end >= sw.action_mid_minus - 1e-12);
            CHECK(sw.action_mid_plus >= sw.action_plus_end - 1e-12);
            CHECK(std::abs(sw.identity_residual) <= 1e-5);
            moved = moved || sw.energy_minus + sw.energy_plus > 0;
        }
        CHECK(moved);
        CHECK(d.asymptotic_ok);
        CHECK(d.contained);
        // the end states are critical loops on the same component
        FlowProblem R(sys, FlowSystem::rabinowitz, N);
        FlowProblem E(sys, FlowSystem::extended, N);
        CHECK(R.norm(R.gradient(res.state.minus.back())) < 1e-6);
        CHECK(E.norm(E.gradient(res.state.plus.back())) < 1e-6);
        CHECK(identify_target(E, res.state.plus.back()).k == 1);
        // coupling of the stored trajectories at s = 0
        CHECK(res.state.s_minus.front() == 0.0);
        CHECK(res.state.s_plus.front() == 0.0);
        CHECK((res.state.minus.front().head(2 * N) - res.state.plus.front().head(2 * N)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("hybrid input validation")
{
    auto sys = make_model(1);
    auto st = stationary_hybrid(sys, 33, 1, 0.0);
    st.plus[0][0] += 1e-6;
    CHECK_THROWS_AS(hybrid_relax(sys, st), ConfigError);
    auto st2 = stationary_hybrid(sys, 33, 1, 0.0);
    st2.plus[0][2 * 33 + 4] += 1e-6;  // eta no longer constant
    CHECK_THROWS_AS(hybrid_relax(sys, st2), ConfigError);
    HybridControls bad;
    bad.S = 0;
    CHECK_THROWS_AS(hybrid_relax(sys, stationary_hybrid(sys, 33, 1, 0.0), bad), ConfigError);
    // kappa rescales the coupled eta
    auto k2 = coupled_hybrid(sys, discrete_critical_loop(sys, 33, 1), Vec::Zero(33), 2.0);
    CHECK(k2.plus[0][2 * 33] == doctest::Approx(2 * discrete_period(33, 1)));
}

TEST_CASE("nearest critical loop recovers the phase")
{
    auto sys = make_model(2);
    const int N = 33;
    RabinowitzLoop L = discrete_critical_loop(sys, N, -2);
    // shift the phase by rotating every sample
    const double ph = 0.37;
    Mat R = std::cos(ph) * Mat::Identity(4, 4) + std::sin(ph) * sys.J();
    RabinowitzLoop S = L;
    S.x = R * L.x;
    RabinowitzLoop back = nearest_critical_loop(sys, S);
    CHECK(back.tau == discrete_period(N, -2));
    CHECK((back.x - S.x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hessian agreement between the two functionals")
{
    auto sys = make_model(1);
    const int N = 33;
    RabinowitzLoop x = discrete_critical_loop(sys, N, 1);
    std::mt19937_64 rng(7);
    auto probes = random_probes(sys, N, rng, 50);
    CHECK(hessian_agreement(sys, x, 0.4, probes) <= 1e-5);

    SUBCASE("degenerate probes")
    {
        HessianProbe zero{Vec::Zero(2 * N + 1), probes[0].xi};
        CHECK(hessian_agreement(sys, x, 0.4, {zero}) == 0.0);
        // the rotation direction J x is tangent to the critical family
        FlowProblem R(sys, FlowSystem::rabinowitz, N);
        Vec v = R.flatten(x);
        Vec rot = Vec::Zero(R.dim());
        for (int j = 0; j < N; ++j) rot.segment(2 * j, 2) = sys.J() * x.x.col(j);
        const double h = 1e-4;
        double d2 = (R.action(v + h * rot) - 2 * R.action(v) + R.action(v - h * rot)) / (h * h);
        CHECK(std::abs(d2) < 1e-6);
        CHECK(std::abs(R.inner(rot, R.hessian_apply(v, rot))) < 1e-10);
    }
    SUBCASE("non-lifted directions do see eta oscillations")
    {
        FlowProblem R(sys, FlowSystem::rabinowitz, N), E(sys, FlowSystem::extended, N);
        Vec v = R.flatten(x), e = E.flatten(lift(x, 0.4));
        Vec w = Vec::Zero(E.dim());
        for (int j = 0; j < N; ++j) {
            w[2 * N + j] = std::cos(2 * M_PI * j / N);
            w[3 * N + j] = std::sin(2 * M_PI * j / N);
        }
        // second variation of the middle term is -2 <zeta, eta'> != 0
        CHECK(std::abs(E.inner(w, E.hessian_apply(e, w))) > 1.0);
    }
    SUBCASE("non-critical base point")
    {
        RabinowitzLoop y = x;
        y.tau += 0.1;
        CHECK_THROWS_AS(hessian_agreement(sys, y, 0.0, probes), ConfigError);
    }
}

TEST_CASE("automatic transversality at the circle orbits")
{
    for (int n : {1, 2}) {
        auto sys = make_model(n);
        std::mt19937_64 rng(11 + n);
        auto rep = auto_transversality_check(sys, discrete_critical_loop(sys, 33, 1), 0.2, rng, 6);
        CHECK(rep.only_rstar_neutral);
        CHECK(rep.rstar_dims == 1);
        CHECK(rep.family_dims == 2 * n - 1);
        CHECK(rep.other_dims == 0);
        CHECK(rep.null_dim == 2 * n);
        CHECK(rep.zero_seed_ok);
        CHECK(rep.convex_ok);
        CHECK(rep.positive_cone_ok);
        CHECK(rep.coupled_seeds_decaying == 0);
        for (double r : rep.plus_rates) CHECK(r >= 0.99 * rep.min_plus_eig);
        for (double r : rep.minus_rates) CHECK(r >= -0.99 * rep.max_minus_eig);
        CHECK(rep.json().find("\"only_rstar_neutral\": true") != std::string::npos);
    }
}

TEST_CASE("hybrid diagnostics csv")
{
    auto sys = make_model(1);
    std::mt19937_64 rng(5);
    auto res = hybrid_relax(sys, perturbed(sys, 17, rng, 1e-3, 0.0));
    std::string csv = res.diag.csv();
    CHECK(csv.rfind("side,step,s,action,grad_norm,energy_cum,eta_avg_residual,zeta_drift,max_abs_H,containment,"
                    "coupling_x,coupling_eta\n",
                    0) == 0);
    CHECK(csv.find("\nminus,0,") != std::string::npos);
    CHECK(csv.find("\nplus,0,") != std::string::npos);
}
