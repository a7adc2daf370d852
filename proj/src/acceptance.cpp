#include "rfhlab/acceptance.hpp"
#include "rfhlab/errors.hpp"
#include "rfhlab/grading.hpp"
#include "rfhlab/gradflow.hpp"
#include "rfhlab/hybrid.hpp"
#include "rfhlab/rsindex.hpp"
#include "rfhlab/z2complex.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

namespace rfh {

namespace {

using Rng = std::mt19937_64;

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Mat random_symmetric(Rng& rng, int d, double scale)
{
    std::normal_distribution<double> nd(0.0, scale);
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = nd(rng);
    return 0.5 * (a + a.transpose());
}

SymplecticPath random_path(Rng& rng, int m)
{
    Mat A = random_symmetric(rng, 2 * m, 4.0), B = random_symmetric(rng, 2 * m, 4.0),
        C = random_symmetric(rng, 2 * m, 3.0);
    return integrate_generator(standard_j(m), [=](double t) { return Mat(A + t * B + std::sin(2 * M_PI * t) * C); },
                               200);
}

struct Ctx {
    const SuiteOptions& opt;
    std::map<std::string, std::string>& art;
    Rng rng_for(int id) const { return Rng(opt.seed + 1000003ull * static_cast<uint64_t>(id)); }
};

// 1. theta paths have index zero
std::pair<bool, std::string> c1(Ctx& cx)
{
    std::string csv = "tau,hp,hpp,mu_rs\n";
    int ok = 0, total = 0;
    for (double tau : {-2.0, 1.0, 5.0})
        for (double hp : {0.5, 1.0, 2.0})
            for (double hpp : {-1.0, 1.0}) {
                ++total;
                std::string v;
                try {
                    HalfInteger mu = rs_index(theta_path(tau, hp, hpp));
                    v = mu.str();
                    if (mu == HalfInteger{0}) ++ok;
                } catch (const Error& e) {
                    v = std::string("error: ") + e.what();
                }
                csv += fmt("%g", tau) + "," + fmt("%g", hp) + "," + fmt("%g", hpp) + "," + v + "\n";
            }
    cx.art["c1_theta_index.csv"] = csv;
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " theta paths give mu_rs = 0"};
}

// 2. perturbation shift on the linearized flow of the n = 1 orbit
std::pair<bool, std::string> c2(Ctx& cx)
{
    auto sys = make_model(1);
    SymplecticPath p = linearized_flow_path(sys, 1);
    HalfInteger base = rs_index(p);
    std::string csv = "delta,mu_rs_base,mu_rs_perturbed,shift\n";
    bool ok = true;
    for (double d : {1e-3, -1e-3}) {
        HalfInteger q = rs_index(perturbed_path(p, d));
        HalfInteger shift = q - base;
        ok = ok && shift == HalfInteger::from_int(d > 0 ? -1 : 1);
        csv += fmt("%g", d) + "," + base.str() + "," + q.str() + "," + shift.str() + "\n";
    }
    cx.art["c2_perturbation_shift.csv"] = csv;
    return {ok, "base mu_rs = " + base.str() + ", shifts -sgn(delta) for delta = +-1e-3"};
}

// 3. block additivity
std::pair<bool, std::string> c3(Ctx& cx)
{
    Rng rng = cx.rng_for(3);
    std::uniform_int_distribution<int> dm(1, 2);
    std::string csv = "trial,m_p,m_q,mu_p,mu_q,mu_pq\n";
    int ok = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const int mp = dm(rng), mq = 1;
        SymplecticPath p = random_path(rng, mp), q = random_path(rng, mq);
        try {
            HalfInteger a = rs_index(p), b = rs_index(q), c = rs_index(block_diag(p, q));
            if (c == a + b) ++ok;
            csv += std::to_string(t) + "," + std::to_string(mp) + "," + std::to_string(mq) + "," + a.str() + "," +
                   b.str() + "," + c.str() + "\n";
        } catch (const Error& e) {
            csv += std::to_string(t) + "," + std::to_string(mp) + "," + std::to_string(mq) + ",error,error,error\n";
        }
    }
    cx.art["c3_block_additivity.csv"] = csv;
    return {ok == trials, std::to_string(ok) + "/" + std::to_string(trials) + " pairs additive"};
}

// 4. grading constants and relative indices
std::pair<bool, std::string> c4(Ctx& cx)
{
    bool ok = true;
    std::string csv;
    int checked = 0;
    for (int n = 1; n <= 3; ++n) {
        auto comps = model_components(make_model(n), 2);
        for (const auto& c : comps) {
            if (c.kind == ComponentKind::constants && mu_K(c) != 1 - n) ok = false;
            if (mu_lambda(c) != mu_K(c) - 1) ok = false;
            try {
                for (int i = 0; i <= c.dimK; ++i) {
                    auto g = make_generator(c, i);
                    if (g.mu_f != g.mu_f_RF) ok = false;
                }
            } catch (const InvariantError&) {
                ok = false;
            }
            ++checked;
        }
        csv += "# n = " + std::to_string(n) + "\n" + grading_report_csv(comps);
    }
    cx.art["c4_grading.csv"] = csv;
    return {ok, "mu(constants) = 1-n for n = 1..3, mu(Lambda) = mu(K)-1 and mu_f = mu_f^RF on " +
                    std::to_string(checked) + " components"};
}

// 5. dimension cross identity
std::pair<bool, std::string> c5(Ctx& cx)
{
    Rng rng = cx.rng_for(5);
    std::uniform_int_distribution<int> ui(-6, 6), dk(0, 5);
    int ok = 0;
    const int trials = 100;
    std::string csv = "trial,mode,x_x,x_L,L_x,L_L\n";
    for (int t = 0; t < trials; ++t) {
        CriticalComponent a, b;
        a.id = "a";
        b.id = "b";
        a.dimK = dk(rng);
        b.dimK = dk(rng);
        // parity keeps mu(K) and mu(Lambda) integral
        a.mu_rs = HalfInteger{2 * ui(rng) + a.dimLambda()};
        b.mu_rs = HalfInteger{2 * ui(rng) + b.dimLambda()};
        std::uniform_int_distribution<int> ia(0, a.dimK), ib(0, b.dimK);
        Endpoint A{a, {}}, B{b, {}}, xa{a, ia(rng)}, xb{b, ib(rng)};
        bool all = true;
        for (auto mode : {CascadeMode::extended, CascadeMode::rabinowitz, CascadeMode::hybrid}) {
            int xx = cascade_dims(mode, xa, xb), xl = cascade_dims(mode, xa, B), lx = cascade_dims(mode, A, xb),
                ll = cascade_dims(mode, A, B);
            all = all && xx == xl + lx - ll;
            const char* name = mode == CascadeMode::extended ? "extended"
                               : mode == CascadeMode::rabinowitz ? "rabinowitz"
                                                                 : "hybrid";
            csv += std::to_string(t) + "," + name + "," + std::to_string(xx) + "," + std::to_string(xl) + "," +
                   std::to_string(lx) + "," + std::to_string(ll) + "\n";
        }
        if (all) ++ok;
    }
    cx.art["c5_dimensions.csv"] = csv;
    return {ok == trials, std::to_string(ok) + "/" + std::to_string(trials) +
                              " inputs satisfy the cross identity in all three calculi"};
}

// 6. hybrid index independent of the branch sign
std::pair<bool, std::string> c6(Ctx& cx)
{
    Rng rng = cx.rng_for(6);
    std::uniform_int_distribution<int> ui(-10, 10), dl(1, 6), nn(1, 3);
    int ok = 0;
    const int trials = 100;
    std::string csv = "trial,mu_K,mu_Lambda,dim_Lambda,n,index_plus,index_minus\n";
    for (int t = 0; t < trials; ++t) {
        int muK = ui(rng), muL = ui(rng), dL = dl(rng), n = nn(rng);
        auto p = fredholm_index_hybrid(hybrid_branch_data(muK, muL, dL, n, +1));
        auto m = fredholm_index_hybrid(hybrid_branch_data(muK, muL, dL, n, -1));
        if (p.total == m.total) ++ok;
        csv += std::to_string(t) + "," + std::to_string(muK) + "," + std::to_string(muL) + "," + std::to_string(dL) +
               "," + std::to_string(n) + "," + std::to_string(p.total) + "," + std::to_string(m.total) + "\n";
    }
    cx.art["c6_hybrid_index.csv"] = csv;
    return {ok == trials, std::to_string(ok) + "/" + std::to_string(trials) + " inputs agree on both branches"};
}

// 7. flow structure on the n = 1 model
std::pair<bool, std::string> c7(Ctx& cx)
{
    Rng rng = cx.rng_for(7);
    auto sys = make_model(1);
    const int N = cx.opt.flow_grid;
    FlowProblem E(sys, FlowSystem::extended, N);
    std::uniform_real_distribution<double> us(-1.0, 1.0);
    std::string csv =
        "run,k,sigma,trials,steps,converged,monotone,energy_residual,eta_residual,zeta_drift,small_grad_checked,small_grad_ok,"
        "contained,final_grad,target_k\n";
    int ok = 0;
    const int runs = 20;
    int fail_a = 0, fail_b = 0, fail_c = 0, fail_d = 0, fail_e = 0, fail_f = 0;
    for (int r = 0; r < runs; ++r) {
        const int k = r % 2 == 0 ? 1 : -1;
        const double sigma = us(rng);
        Vec c = E.flatten(lift(discrete_critical_loop(sys, N, k), sigma));
        Slice sl = center_stable_slice(E, c);
        Vec v0 = c + stable_perturbation(E, sl, rng, 1e-2);
        ShootResult sh;
        try {
            sh = shoot(E, sl, v0, {});
        } catch (const Error& e) {
            csv += std::to_string(r) + ",error\n";
            continue;
        }
        const auto& d = sh.run.diag;
        bool mono = d.max_action_increase <= 1e-12;
        for (size_t i = 1; i < d.records.size(); ++i) mono = mono && d.records[i].action <= d.records[i - 1].action + 1e-12;
        const bool a = mono, b = std::abs(d.energy_residual()) <= 1e-6, cc = d.max_eta_residual <= 1e-6,
                   dd = d.max_zeta_drift <= 1e-10, e = d.small_grad_ok && d.small_grad_checked > 0, f = d.contained;
        const int tk = identify_target(E, sh.run.state).k;
        fail_a += !a, fail_b += !b, fail_c += !cc, fail_d += !dd, fail_e += !e, fail_f += !f;
        if (d.converged && a && b && cc && dd && e && f && tk == k) ++ok;
        csv += std::to_string(r) + "," + std::to_string(k) + "," + fmt("%.6f", sigma) + "," +
               std::to_string(sh.trials) + "," + std::to_string(d.steps) + "," + (d.converged ? "1" : "0") + "," +
               (mono ? "1" : "0") + "," + fmt("%.3e", d.energy_residual()) + "," + fmt("%.3e", d.max_eta_residual) +
               "," + fmt("%.3e", d.max_zeta_drift) + "," + std::to_string(d.small_grad_checked) + "," +
               (d.small_grad_ok ? "1" : "0") + "," + (d.contained ? "1" : "0") + "," +
               fmt("%.3e", d.records.back().grad_norm) + "," + std::to_string(tk) + "\n";
        if (r == 0) cx.art["c7_flow_run0.csv"] = d.csv();
    }
    cx.art["c7_flow_runs.csv"] = csv;
    std::string detail = std::to_string(ok) + "/" + std::to_string(runs) + " runs converge with (a)-(f)";
    if (ok != runs)
        detail += " [failures a:" + std::to_string(fail_a) + " b:" + std::to_string(fail_b) + " c:" +
                  std::to_string(fail_c) + " d:" + std::to_string(fail_d) + " e:" + std::to_string(fail_e) +
                  " f:" + std::to_string(fail_f) + "]";
    return {ok == runs, detail};
}

// 8. hybrid stationary solutions, Hessians, transversality
std::pair<bool, std::string> c8(Ctx& cx)
{
    Rng rng = cx.rng_for(8);
    const int N = cx.opt.flow_grid;
    bool fixed = true;
    std::string csv = "n,k,sigma,sweeps,steps_minus,steps_plus,energy_minus,energy_plus,coupling\n";
    for (int n : {1, 2})
        for (int k : {-1, 1}) {
            auto sys = make_model(n);
            const double sigma = 0.25 * k;
            auto res = hybrid_relax(sys, stationary_hybrid(sys, N, k, sigma));
            const auto& d = res.diag;
            const auto& sw = d.sweeps.back();
            fixed = fixed && d.converged && d.minus.steps == 0 && d.plus.steps == 0 && sw.energy_minus == 0 &&
                    sw.energy_plus == 0 && d.max_coupling_residual <= 1e-12;
            csv += std::to_string(n) + "," + std::to_string(k) + "," + fmt("%.3f", sigma) + "," +
                   std::to_string(d.sweeps.size()) + "," + std::to_string(d.minus.steps) + "," +
                   std::to_string(d.plus.steps) + "," + fmt("%.3e", sw.energy_minus) + "," +
                   fmt("%.3e", sw.energy_plus) + "," + fmt("%.3e", d.max_coupling_residual) + "\n";
        }
    auto sys = make_model(1);
    RabinowitzLoop x = discrete_critical_loop(sys, N, 1);
    auto probes = random_probes(sys, N, rng, 50);
    const double agree = hessian_agreement(sys, x, 0.5, probes);
    auto rep = auto_transversality_check(sys, x, 0.5, rng, 10);
    cx.art["c8_hybrid_stationary.csv"] = csv;
    cx.art["c8_transversality.json"] = rep.json();
    cx.art["c8_hessian_agreement.txt"] = fmt("%.6e", agree) + "\n";
    const bool ok = fixed && agree <= 1e-5 && rep.only_rstar_neutral && rep.convex_ok && rep.zero_seed_ok &&
                    rep.coupled_seeds_decaying == 0;
    return {ok, std::string(fixed ? "stationary inputs fixed with zero energy" : "stationary input moved") +
                    ", Hessian discrepancy " + fmt("%.1e", agree) + ", neutral directions beyond the family: " +
                    std::to_string(rep.null_dim - rep.family_dims) + " (R*: " + std::to_string(rep.rstar_dims) +
                    ")"};
}

// 9. Z2 algebra
std::pair<bool, std::string> c9(Ctx& cx)
{
    Rng rng = cx.rng_for(9);
    std::uniform_int_distribution<int> sz(1, 64);
    int complexes = 0, dsq = 0, inverses = 0, inv_ok = 0, maps = 0, map_ok = 0;
    std::string csv = "trial,generators,graded,d_squared_zero,inverse_ok,chain_map_ok,homology_total\n";
    for (int t = 0; t < 100; ++t) {
        const int n = sz(rng);
        const bool graded = t % 2 == 0;
        auto gens = random_generators(rng, n, graded);
        auto src = random_toy_complex(rng, gens);
        auto phi = random_chain_iso(rng, gens);
        auto tgt = conjugate_complex(phi, src);
        bool d1 = verify_d_squared(src).ok, d2 = verify_d_squared(tgt).ok;
        complexes += 2;
        dsq += d1 + d2;
        auto inv = phi_invert(phi);
        bool io = (phi.counts() * inv.counts()) == BitMatrix::identity(n) &&
                  (inv.counts() * phi.counts()) == BitMatrix::identity(n);
        ++inverses;
        inv_ok += io;
        bool cm = verify_chain_map(phi, src, tgt).ok;
        ++maps;
        map_ok += cm;
        csv += std::to_string(t) + "," + std::to_string(n) + "," + (graded ? "1" : "0") + "," +
               ((d1 && d2) ? "1" : "0") + "," + (io ? "1" : "0") + "," + (cm ? "1" : "0") + "," +
               std::to_string(homology(src).total) + "\n";
    }
    cx.art["c9_algebra.csv"] = csv;
    const bool ok = dsq == complexes && inv_ok == inverses && map_ok == maps;
    return {ok, "d^2 = 0 on " + std::to_string(dsq) + "/" + std::to_string(complexes) + " complexes, inverses " +
                    std::to_string(inv_ok) + "/" + std::to_string(inverses) + ", chain maps " +
                    std::to_string(map_ok) + "/" + std::to_string(maps)};
}

struct Spec {
    int id;
    const char* title;
    double budget;
    std::function<std::pair<bool, std::string>(Ctx&)> fn;
};

const std::vector<Spec>& specs()
{
    static const std::vector<Spec> s = {
        {1, "index anchor", 1.0, c1},
        {2, "perturbation shift", 1.0, c2},
        {3, "block additivity", 10.0, c3},
        {4, "grading", 0, c4},
        {5, "dimension calculus", 0, c5},
        {6, "hybrid index branches", 0, c6},
        {7, "flow structure", 120.0, c7},
        {8, "hybrid stationary", 60.0, c8},
        {9, "Z2 algebra", 10.0, c9},
    };
    return s;
}

std::vector<CriterionResult> run_core(const SuiteOptions& opt, const std::set<int>& ids,
                                      std::map<std::string, std::string>& art)
{
    Ctx cx{opt, art};
    std::vector<CriterionResult> out;
    for (const auto& sp : specs()) {
        if (!ids.empty() && !ids.count(sp.id)) continue;
        CriterionResult r;
        r.id = sp.id;
        r.title = sp.title;
        r.budget = sp.budget;
        auto t0 = std::chrono::steady_clock::now();
        try {
            auto [ok, detail] = sp.fn(cx);
            r.pass = ok;
            r.detail = detail;
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (r.budget > 0 && r.seconds > r.budget) {
            r.pass = false;
            r.detail += " [over the " + fmt("%g", r.budget) + " s budget]";
        }
        out.push_back(r);
    }
    return out;
}

}

bool SuiteResult::all_pass() const
{
    for (const auto& c : criteria)
        if (!c.pass) return false;
    return !criteria.empty();
}

SuiteResult run_acceptance(const SuiteOptions& opt)
{
    SuiteResult res;
    std::set<int> core;
    for (int id : opt.only)
        if (id != 10) core.insert(id);
    const bool want10 = opt.only.empty() || opt.only.count(10);
    if (opt.only.empty() || !core.empty()) res.criteria = run_core(opt, core, res.artifacts);
    if (want10) {
        CriterionResult r;
        r.id = 10;
        r.title = "determinism";
        auto t0 = std::chrono::steady_clock::now();
        std::map<std::string, std::string> first = res.artifacts, second;
        if (first.empty()) run_core(opt, {}, first);
        run_core(opt, {}, second);
        int same = 0, total = 0;
        std::string differing;
        for (const auto& [name, text] : first) {
            ++total;
            auto it = second.find(name);
            if (it != second.end() && it->second == text)
                ++same;
            else
                differing += " " + name;
        }
        r.pass = total > 0 && same == total && first.size() == second.size();
        r.detail = std::to_string(same) + "/" + std::to_string(total) + " artifacts byte-identical across two runs" +
                   (differing.empty() ? "" : " (differ:" + differing + ")");
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.criteria.push_back(r);
    }
    return res;
}

std::string format_line(const CriterionResult& r)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", r.seconds);
    return std::string(r.pass ? "PASS" : "FAIL") + "  criterion " + std::to_string(r.id) + " (" + r.title +
           "): " + r.detail + " [" + buf + " s]";
}

void write_artifacts(const SuiteResult& r, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    for (const auto& [name, text] : r.artifacts) {
        std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write artifact " + name + " in " + dir);
        f << text;
    }
}

}
