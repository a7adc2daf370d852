#include "rfhlab/hybrid.hpp"
#include "rfhlab/errors.hpp"
#include "rfhlab/kernels.hpp"

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rfh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int grid_of(const ModelSystem& sys, const Vec& minus0)
{
    const int d = 2 * sys.n;
    const int N = static_cast<int>((minus0.size() - 1) / d);
    if (N * d + 1 != minus0.size()) throw ConfigError("minus state does not have the Rabinowitz layout");
    return N;
}

// Coupled datum y = (x, tau, zeta) and the lift iota(y) = (x, kappa tau, zeta).
struct Coupling {
    int d, N;
    double kappa;

    int dim() const { return d * N + 1 + N; }
    Vec weights() const
    {
        Vec w = Vec::Constant(dim(), 1.0 / N);
        w[d * N] = 1;
        return w;
    }
    Vec lift(const Vec& y) const
    {
        Vec e(d * N + 2 * N);
        e.head(d * N) = y.head(d * N);
        e.segment(d * N, N).setConstant(kappa * y[d * N]);
        e.tail(N) = y.tail(N);
        return e;
    }
    Mat lift_matrix() const
    {
        Mat M = Mat::Zero(d * N + 2 * N, dim());
        M.topLeftCorner(d * N, d * N).setIdentity();
        M.block(d * N, d * N, N, 1).setConstant(kappa);
        M.bottomRightCorner(N, N).setIdentity();
        return M;
    }
    Vec pack(const Vec& minus0, const Vec& zeta) const
    {
        Vec y(dim());
        y.head(d * N + 1) = minus0;
        y.tail(N) = zeta;
        return y;
    }
};

void coupling_residuals(const Coupling& c, const Vec& minus0, const Vec& plus0, double& rx, double& reta)
{
    const int dN = c.d * c.N;
    rx = (minus0.head(dN) - plus0.head(dN)).cwiseAbs().maxCoeff();
    reta = (plus0.segment(dN, c.N).array() - c.kappa * minus0[dN]).abs().maxCoeff();
}

}

RabinowitzLoop nearest_critical_loop(const ModelSystem& sys, const RabinowitzLoop& L, int kmax)
{
    const int N = L.N(), d = 2 * sys.n;
    int k = 0;
    double best = std::abs(L.tau);
    for (int j = -kmax; j <= kmax; ++j) {
        if (j == 0) continue;
        double gap = std::abs(L.tau - discrete_period(N, j));
        if (gap < best) best = gap, k = j;
    }
    const Mat& J = sys.J();
    Vec p = Vec::Zero(d);
    if (k == 0) {
        p = L.x.rowwise().mean();
    } else {
        for (int j = 0; j < N; ++j) {
            double th = 2 * M_PI * k * j / N;
            p += std::cos(th) * L.x.col(j) - std::sin(th) * (J * L.x.col(j));
        }
        p /= N;
    }
    if (!(p.norm() > 1e-12)) p = Vec::Unit(d, 0);
    p.normalize();
    RabinowitzLoop out;
    out.x.resize(d, N);
    for (int j = 0; j < N; ++j) {
        double th = 2 * M_PI * k * j / N;
        out.x.col(j) = std::cos(th) * p + std::sin(th) * (J * p);
    }
    out.tau = k == 0 ? 0.0 : discrete_period(N, k);
    return out;
}

HybridState stationary_hybrid(const ModelSystem& sys, int N, int k, double sigma)
{
    return coupled_hybrid(sys, discrete_critical_loop(sys, N, k), Vec::Constant(N, sigma));
}

HybridState coupled_hybrid(const ModelSystem& sys, const RabinowitzLoop& minus0, const Vec& zeta, double kappa)
{
    FlowProblem R(sys, FlowSystem::rabinowitz, minus0.N());
    if (zeta.size() != minus0.N()) throw ConfigError("zeta loop has the wrong grid size");
    Coupling c{2 * sys.n, minus0.N(), kappa};
    HybridState st;
    Vec m = R.flatten(minus0);
    st.minus = {m};
    st.s_minus = {0.0};
    st.plus = {c.lift(c.pack(m, zeta))};
    st.s_plus = {0.0};
    return st;
}

std::string HybridDiagnostics::csv() const
{
    std::string out =
        "side,step,s,action,grad_norm,energy_cum,eta_avg_residual,zeta_drift,max_abs_H,containment,coupling_x,"
        "coupling_eta\n";
    const double cx = sweeps.empty() ? 0 : sweeps.back().coupling_x;
    const double ce = sweeps.empty() ? 0 : sweeps.back().coupling_eta;
    char buf[400];
    auto emit = [&](const char* side, const FlowDiagnostics& fd) {
        for (const auto& r : fd.records) {
            std::snprintf(buf, sizeof buf, "%s,%ld,%.12e,%.15e,%.6e,%.12e,%.6e,%.6e,%.9e,%d,%.3e,%.3e\n", side, r.step,
                          r.s, r.action, r.grad_norm, r.energy_cum, r.eta_avg_residual, r.zeta_drift, r.max_abs_H,
                          r.containment ? 1 : 0, cx, ce);
            out += buf;
        }
    };
    emit("minus", minus);
    emit("plus", plus);
    return out;
}

HybridResult hybrid_relax(const ModelSystem& sys, const HybridState& initial, const HybridControls& ctl)
{
    if (initial.minus.empty() || initial.plus.empty()) throw ConfigError("hybrid state needs s = 0 data on both sides");
    if (!(ctl.S > 0) || !(ctl.ds > 0) || !(ctl.cut > 0) || !(ctl.sweep_tol > 0) || ctl.max_sweeps < 1)
        throw ConfigError("hybrid controls must be positive");
    const Vec& m0 = initial.minus.front();
    const Vec& p0 = initial.plus.front();
    const int N = grid_of(sys, m0);
    const int d = 2 * sys.n, dN = d * N;
    FlowProblem R(sys, FlowSystem::rabinowitz, N), E(sys, FlowSystem::extended, N);
    if (p0.size() != E.dim()) throw ConfigError("plus state does not have the extended layout");
    Coupling cp{d, N, ctl.kappa};
    double rx, reta;
    coupling_residuals(cp, m0, p0, rx, reta);
    if (rx > ctl.coupling_tol || reta > ctl.coupling_tol)
        throw ConfigError("initial hybrid state violates the coupling at s = 0");

    HybridResult res;
    HybridDiagnostics& dg = res.diag;
    const RabinowitzLoop ref = nearest_critical_loop(sys, R.rabinowitz(m0));
    for (int k = -3; k <= 3; ++k)
        if (k != 0 && std::abs(ref.tau - discrete_period(N, k)) < 1e-12) dg.k = k;
    const double sigma = ordered_mean(p0.tail(N));
    const Vec cR = R.flatten(ref);
    const Vec cE = E.flatten(lift(ref, sigma));
    const Slice Pm = spectral_slice(R, cR, -kInf, ctl.cut);
    const Slice Pp = spectral_slice(E, cE, -ctl.cut, kInf);
    const Slice Fp = spectral_slice(E, cE, -kInf, -ctl.cut);

    // affine projections in the coupled space
    const Vec Wc = cp.weights();
    const Mat M = Fp.basis.transpose() * E.weights().asDiagonal() * cp.lift_matrix();
    const Vec b = Fp.basis.transpose() * E.weights().cwiseProduct(cE);
    const Mat MWt = Wc.cwiseInverse().asDiagonal() * M.transpose();
    const Eigen::CompleteOrthogonalDecomposition<Mat> G(M * MWt);
    auto proj_minus = [&](Vec y) {
        y.head(dN + 1) = cR + Pm.project(y.head(dN + 1) - cR);
        return y;
    };
    auto proj_plus = [&](const Vec& y) -> Vec { return y - MWt * G.solve(Vec(M * y - b)); };
    auto normC = [&](const Vec& y) { return std::sqrt(y.cwiseProduct(Wc).dot(y)); };

    Vec y = cp.pack(m0, p0.tail(N));
    double S = ctl.S;
    FlowResult fm, fp;
    auto run_halves = [&](const Vec& yy, HybridSweep& sw) {
        Vec md = yy.head(dN + 1), pd = cp.lift(yy);
        coupling_residuals(cp, md, pd, sw.coupling_x, sw.coupling_eta);
        dg.max_coupling_residual = std::max({dg.max_coupling_residual, sw.coupling_x, sw.coupling_eta});
        if (sw.coupling_x > ctl.coupling_tol || sw.coupling_eta > ctl.coupling_tol)
            throw NumericalError("relaxation diverged: coupling residual at s = 0 grew to " +
                                 std::to_string(std::max(sw.coupling_x, sw.coupling_eta)));
        FlowControls c;
        c.ds = ctl.ds;
        c.s_max = S;
        c.store_states = true;
        c.slice = &Pm;
        c.backward = true;
        fm = integrate(R, md, c);
        c.slice = &Pp;
        c.backward = false;
        fp = integrate(E, pd, c);
        sw.action_minus_end = fm.diag.action_end;
        sw.action_mid_minus = fm.diag.action_start;
        sw.action_mid_plus = fp.diag.action_start;
        sw.action_plus_end = fp.diag.action_end;
        sw.energy_minus = fm.diag.energy;
        sw.energy_plus = fp.diag.energy;
        sw.identity_residual = sw.energy_minus + sw.energy_plus - (sw.action_minus_end - sw.action_plus_end);
        const double tol = ctl.action_tol;
        if (sw.action_minus_end < sw.action_mid_minus - tol || sw.action_mid_plus < sw.action_plus_end - tol)
            throw InvariantError("action chain violated along a half-cylinder");
        if (ctl.kappa == 1 && std::abs(sw.action_mid_minus - sw.action_mid_plus) > tol)
            throw InvariantError("action chain violated: middle equality at s = 0");
    };

    double first_change = -1;
    for (int it = 1; it <= ctl.max_sweeps; ++it) {
        HybridSweep sw;
        sw.sweep = it;
        Vec yn = proj_plus(proj_minus(y));
        sw.datum_change = normC(yn - y);
        y = yn;
        run_halves(y, sw);
        dg.sweeps.push_back(sw);
        if (first_change < 0) first_change = sw.datum_change;
        if (sw.datum_change <= ctl.sweep_tol * (1 + normC(y))) {
            dg.converged = true;
            break;
        }
        if (it > 5 && sw.datum_change > 1e3 * first_change + 1e-8)
            throw NumericalError("relaxation diverged: datum change is growing");
    }
    auto ends_ok = [&] {
        return fm.diag.final_restricted_grad <= ctl.end_tol && fp.diag.final_restricted_grad <= ctl.end_tol;
    };
    while (!ends_ok() && 2 * S <= ctl.S_max) {
        S *= 2;
        HybridSweep sw;
        sw.sweep = static_cast<int>(dg.sweeps.size()) + 1;
        run_halves(y, sw);
        dg.sweeps.push_back(sw);
    }
    dg.asymptotic_ok = ends_ok();
    dg.S = S;
    dg.end_grad_minus = fm.diag.final_restricted_grad;
    dg.end_grad_plus = fp.diag.final_restricted_grad;
    dg.energy_residual = dg.sweeps.back().identity_residual;
    dg.contained = fm.diag.contained && fp.diag.contained;
    for (const Vec& v : fm.diag.states) dg.max_abs_eta_minus = std::max(dg.max_abs_eta_minus, std::abs(v[dN]));
    for (const Vec& v : fp.diag.states) {
        dg.max_abs_eta_plus = std::max(dg.max_abs_eta_plus, v.segment(dN, N).cwiseAbs().maxCoeff());
        Vec z = v.tail(N);
        dg.max_zeta_osc_plus =
            std::max(dg.max_zeta_osc_plus, (z.array() - ordered_mean(z)).abs().maxCoeff());
    }
    res.state.S = S;
    res.state.minus = std::move(fm.diag.states);
    res.state.s_minus = std::move(fm.diag.state_s);
    res.state.plus = std::move(fp.diag.states);
    res.state.s_plus = std::move(fp.diag.state_s);
    dg.minus = std::move(fm.diag);
    dg.plus = std::move(fp.diag);
    return res;
}

std::vector<HessianProbe> random_probes(const ModelSystem& sys, int N, std::mt19937_64& rng, int count)
{
    const int d = 2 * sys.n;
    std::normal_distribution<double> nd(0.0, 1.0);
    auto smooth = [&](int rows) {
        Mat out = Mat::Zero(rows, N);
        for (int r = 0; r < rows; ++r)
            for (int m = 0; m <= 3; ++m) {
                double a = nd(rng) / (1 + m), c = nd(rng) / (1 + m);
                for (int j = 0; j < N; ++j) {
                    double th = 2 * M_PI * m * j / N;
                    out(r, j) += a * std::cos(th) + c * std::sin(th);
                }
            }
        return out;
    };
    std::vector<HessianProbe> probes;
    for (int i = 0; i < count; ++i) {
        HessianProbe p;
        Mat x = smooth(d);
        p.v.resize(d * N + 1);
        p.v.head(d * N) = Eigen::Map<Vec>(x.data(), d * N);
        p.v[d * N] = nd(rng);
        Mat xi = smooth(1);
        p.xi = xi.row(0).transpose();
        probes.push_back(std::move(p));
    }
    return probes;
}

double hessian_agreement(const ModelSystem& sys, const RabinowitzLoop& xhat, double sigma,
                         const std::vector<HessianProbe>& probes, double h)
{
    const int N = xhat.N(), dN = 2 * sys.n * N;
    FlowProblem R(sys, FlowSystem::rabinowitz, N), E(sys, FlowSystem::extended, N);
    const Vec v0 = R.flatten(xhat);
    if (R.norm(R.gradient(v0)) > 1e-7) throw ConfigError("hessian_agreement needs a critical base point");
    const Vec e0 = E.flatten(lift(xhat, sigma));
    const double aR = R.action(v0), aE = E.action(e0);
    double worst = 0;
    for (const auto& p : probes) {
        if (p.v.size() != R.dim() || p.xi.size() != N) throw ConfigError("probe has the wrong layout");
        Vec w(E.dim());
        w.head(dN) = p.v.head(dN);
        w.segment(dN, N).setConstant(p.v[dN]);
        w.tail(N) = p.xi;
        double d2R = (R.action(v0 + h * p.v) - 2 * aR + R.action(v0 - h * p.v)) / (h * h);
        double d2E = (E.action(e0 + h * w) - 2 * aE + E.action(e0 - h * w)) / (h * h);
        worst = std::max(worst, std::abs(d2R - d2E));
    }
    return worst;
}

std::string TransversalityReport::json() const
{
    nlohmann::ordered_json j;
    j["null_dim"] = null_dim;
    j["family_dims"] = family_dims;
    j["rstar_dims"] = rstar_dims;
    j["other_dims"] = other_dims;
    j["only_rstar_neutral"] = only_rstar_neutral;
    j["zero_seed_ok"] = zero_seed_ok;
    j["convex_ok"] = convex_ok;
    j["positive_cone_ok"] = positive_cone_ok;
    j["coupled_seeds"] = coupled_seeds;
    j["coupled_seeds_decaying"] = coupled_seeds_decaying;
    j["min_plus_eig"] = min_plus_eig;
    j["max_minus_eig"] = max_minus_eig;
    j["plus_rates"] = plus_rates;
    j["minus_rates"] = minus_rates;
    return j.dump(1) + "\n";
}

namespace {

// Linearized flow z' = -sgn H z restricted to a spectral slice, explicit
// Euler; returns phi = |z|^2 on the step grid.
std::vector<double> evolve_seed(const FlowProblem& prob, const Slice& sl, const Vec& c, Vec z, double sgn,
                                double ds, int steps)
{
    std::vector<double> phi;
    phi.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        phi.push_back(prob.inner(z, z));
        if (i < steps) z -= sgn * ds * sl.project(prob.hessian_apply(c, z));
    }
    return phi;
}

bool convex_decreasing(const std::vector<double>& phi)
{
    const double scale = phi.front();
    for (size_t i = 1; i < phi.size(); ++i)
        if (phi[i] > phi[i - 1] + 1e-15 * scale) return false;
    for (size_t i = 1; i + 1 < phi.size(); ++i)
        if (phi[i + 1] - 2 * phi[i] + phi[i - 1] < -1e-13 * scale) return false;
    return true;
}

double decay_rate(const std::vector<double>& phi, double ds)
{
    const size_t a = phi.size() / 2, b = phi.size() - 1;
    return -0.5 * std::log(phi[b] / phi[a]) / ((b - a) * ds);
}

Vec random_in(const Slice& sl, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec c(sl.basis.cols());
    for (int i = 0; i < c.size(); ++i) c[i] = nd(rng) / (1 + std::abs(sl.basis_eigs[i]));
    return sl.basis * c;
}

}

TransversalityReport auto_transversality_check(const ModelSystem& sys, const RabinowitzLoop& xhat, double sigma,
                                               std::mt19937_64& rng, int seeds, double kappa)
{
    const int N = xhat.N(), d = 2 * sys.n, dN = d * N;
    const double ztol = 1e-7;
    FlowProblem R(sys, FlowSystem::rabinowitz, N), E(sys, FlowSystem::extended, N);
    const Vec cR = R.flatten(xhat);
    const Vec cE = E.flatten(lift(xhat, sigma));
    if (R.norm(R.gradient(cR)) > 1e-7) throw ConfigError("transversality check needs a critical base point");
    Coupling cp{d, N, kappa};

    const Slice Rm0 = spectral_slice(R, cR, -kInf, ztol);   // decays as s -> -inf or stays
    const Slice Rm = spectral_slice(R, cR, -kInf, -ztol);
    const Slice R0 = spectral_slice(R, cR, -ztol, ztol);
    const Slice Ep0 = spectral_slice(E, cE, -ztol, kInf);    // decays as s -> +inf or stays
    const Slice Ep = spectral_slice(E, cE, ztol, kInf);

    TransversalityReport rep;
    rep.min_plus_eig = Ep.basis_eigs.size() ? Ep.basis_eigs.minCoeff() : 0;
    rep.max_minus_eig = Rm.basis_eigs.size() ? Rm.basis_eigs.maxCoeff() : 0;

    // Bounded coupled solutions: alpha in E-(+)E0 of the Rabinowitz Hessian,
    // beta in E+(+)E0 of the extended one, with matching x and eta at s = 0.
    const int a = static_cast<int>(Rm0.basis.cols()), bcols = static_cast<int>(Ep0.basis.cols());
    Mat C(dN + N, a + bcols);
    C.topLeftCorner(dN, a) = -Rm0.basis.topRows(dN);
    C.topRightCorner(dN, bcols) = Ep0.basis.topRows(dN);
    C.bottomLeftCorner(N, a) = -kappa * Vec::Ones(N) * Rm0.basis.row(dN);
    C.bottomRightCorner(N, bcols) = Ep0.basis.middleRows(dN, N);
    const Mat null = null_space(C, 1e-8);
    rep.null_dim = static_cast<int>(null.cols());

    // expected bounded directions: the critical family and the R* shift
    Mat V0(a + bcols, R0.basis.cols() + 1);
    for (int i = 0; i < R0.basis.cols(); ++i) {
        Vec e = R0.basis.col(i);
        V0.col(i) << Rm0.basis.transpose() * R.weights().cwiseProduct(e),
            Ep0.basis.transpose() * E.weights().cwiseProduct(cp.lift(cp.pack(e, Vec::Zero(N))));
    }
    V0.col(V0.cols() - 1) << Vec::Zero(a), Ep0.basis.transpose() * E.weights().cwiseProduct(E.zeta_direction());
    auto in_null = [&](const Vec& c) { return (C * c).norm() <= 1e-8 * std::max(1.0, c.norm()); };
    for (int i = 0; i < R0.basis.cols(); ++i)
        if (in_null(V0.col(i))) ++rep.family_dims;
    rep.rstar_dims = in_null(V0.col(V0.cols() - 1)) && V0.col(V0.cols() - 1).norm() > 0.5 ? 1 : 0;
    Eigen::JacobiSVD<Mat> sv(V0);
    int rank_v0 = 0;
    for (int i = 0; i < sv.singularValues().size(); ++i)
        if (sv.singularValues()[i] > 1e-8 * sv.singularValues()[0]) ++rank_v0;
    rep.other_dims = rep.null_dim - rank_v0;
    rep.only_rstar_neutral = rep.other_dims == 0 && rep.rstar_dims == 1 && rank_v0 == rep.family_dims + 1;

    // zero seed
    {
        auto phi = evolve_seed(E, Ep, cE, Vec::Zero(E.dim()), 1, 0.01, 50);
        rep.zero_seed_ok = std::all_of(phi.begin(), phi.end(), [](double v) { return v == 0; });
    }
    const double ds = 0.01;
    const int steps = 1000;
    for (int i = 0; i < seeds; ++i) {
        Vec zp = random_in(Ep, rng);
        zp *= 1e-3 / E.norm(zp);
        // sign of phi'(0) = -2 <z, H z> from the Hessian quadrature
        if (!(E.inner(zp, E.hessian_apply(cE, zp)) > 0)) rep.positive_cone_ok = false;
        auto phi = evolve_seed(E, Ep, cE, zp, 1, ds, steps);
        rep.convex_ok = rep.convex_ok && convex_decreasing(phi);
        rep.plus_rates.push_back(decay_rate(phi, ds));

        Vec zm = random_in(Rm, rng);
        zm *= 1e-3 / R.norm(zm);
        auto phm = evolve_seed(R, Rm, cR, zm, -1, ds, steps);
        rep.convex_ok = rep.convex_ok && convex_decreasing(phm);
        rep.minus_rates.push_back(decay_rate(phm, ds));

        // generic coupled seed: decaying on the minus side, then lifted
        Vec am = random_in(Rm0, rng);
        std::normal_distribution<double> nd(0.0, 1.0);
        Vec zeta(N);
        for (int j = 0; j < N; ++j) zeta[j] = nd(rng);
        Vec lifted = cp.lift(cp.pack(am, zeta));
        Vec bad = lifted - Ep.project(lifted);
        ++rep.coupled_seeds;
        if (E.norm(bad) <= 1e-8 * E.norm(lifted)) ++rep.coupled_seeds_decaying;
    }
    return rep;
}

}
