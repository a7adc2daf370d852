#include "rfhlab/gradflow.hpp"
#include "rfhlab/errors.hpp"
#include "rfhlab/kernels.hpp"

#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <map>

namespace rfh {

namespace {

void eval(const ModelSystem& sys, const Mat& x, const Vec& w, const Vec* eta, const Vec* zeta, PointwiseOut& out,
          bool parallel)
{
    if (parallel)
        pointwise_parallel(sys, x, w, eta, zeta, out);
    else
        pointwise_serial(sys, x, w, eta, zeta, out);
}

double mean_product(const Vec& a, const Vec& b)
{
    double s = 0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}


}

double ExtendedLoop::eta_avg() const { return ordered_mean(eta); }
double ExtendedLoop::zeta_avg() const { return ordered_mean(zeta); }

ExtendedLoop lift(const RabinowitzLoop& L, double sigma)
{
    ExtendedLoop E;
    E.x = L.x;
    E.eta = Vec::Constant(L.N(), L.tau);
    E.zeta = Vec::Constant(L.N(), sigma);
    return E;
}

double action_rabinowitz(const ModelSystem& sys, const RabinowitzLoop& L)
{
    FlowProblem p(sys, FlowSystem::rabinowitz, L.N());
    return p.action(p.flatten(L));
}

double action_extended(const ModelSystem& sys, const ExtendedLoop& L)
{
    FlowProblem p(sys, FlowSystem::extended, L.N());
    return p.action(p.flatten(L));
}

double RabinowitzGradient::norm() const
{
    return std::sqrt(gx.squaredNorm() / static_cast<double>(gx.cols()) + gtau * gtau);
}

double ExtendedGradient::norm() const
{
    const double N = static_cast<double>(gx.cols());
    return std::sqrt((gx.squaredNorm() + geta.squaredNorm() + gzeta.squaredNorm()) / N);
}

RabinowitzGradient gradient_rabinowitz(const ModelSystem& sys, const RabinowitzLoop& L)
{
    FlowProblem p(sys, FlowSystem::rabinowitz, L.N());
    Vec g = p.gradient(p.flatten(L));
    RabinowitzLoop r = p.rabinowitz(g);
    return {r.x, r.tau};
}

ExtendedGradient gradient_extended(const ModelSystem& sys, const ExtendedLoop& L)
{
    FlowProblem p(sys, FlowSystem::extended, L.N());
    Vec g = p.gradient(p.flatten(L));
    ExtendedLoop e = p.extended(g);
    return {e.x, e.eta, e.zeta};
}

FlowProblem::FlowProblem(const ModelSystem& sys, FlowSystem kind, int N)
    : sys_(sys), kind_(kind), N_(N), d_(2 * sys.n)
{
    if (N < 8) throw ConfigError("grid size must be at least 8");
    const int loops = d_ * N + (kind == FlowSystem::extended ? 2 * N : 0);
    w_ = Vec::Constant(loops + (kind == FlowSystem::rabinowitz ? 1 : 0), 1.0 / N);
    if (kind == FlowSystem::rabinowitz) w_[loops] = 1.0;
}

Vec FlowProblem::flatten(const RabinowitzLoop& L) const
{
    if (kind_ != FlowSystem::rabinowitz || L.N() != N_ || L.x.rows() != d_)
        throw ConfigError("loop does not match the Rabinowitz problem layout");
    Vec v(dim());
    v.head(d_ * N_) = Eigen::Map<const Vec>(L.x.data(), d_ * N_);
    v[d_ * N_] = L.tau;
    return v;
}

Vec FlowProblem::flatten(const ExtendedLoop& L) const
{
    if (kind_ != FlowSystem::extended || L.N() != N_ || L.x.rows() != d_ || L.eta.size() != N_ ||
        L.zeta.size() != N_)
        throw ConfigError("loop does not match the extended problem layout");
    Vec v(dim());
    v.head(d_ * N_) = Eigen::Map<const Vec>(L.x.data(), d_ * N_);
    v.segment(d_ * N_, N_) = L.eta;
    v.segment(d_ * N_ + N_, N_) = L.zeta;
    return v;
}

RabinowitzLoop FlowProblem::rabinowitz(const Vec& v) const
{
    RabinowitzLoop L;
    L.x = Eigen::Map<const Mat>(v.data(), d_, N_);
    L.tau = v[d_ * N_];
    return L;
}

ExtendedLoop FlowProblem::extended(const Vec& v) const
{
    ExtendedLoop L;
    L.x = Eigen::Map<const Mat>(v.data(), d_, N_);
    L.eta = v.segment(d_ * N_, N_);
    L.zeta = v.segment(d_ * N_ + N_, N_);
    return L;
}

double FlowProblem::inner(const Vec& a, const Vec& b) const
{
    double s = 0;
    for (int i = 0; i < a.size(); ++i) s += w_[i] * a[i] * b[i];
    return s;
}

double FlowProblem::norm(const Vec& a) const { return std::sqrt(inner(a, a)); }

double FlowProblem::action(const Vec& v) const
{
    const Eigen::Map<const Mat> x(v.data(), d_, N_);
    PointwiseOut out;
    if (kind_ == FlowSystem::rabinowitz) {
        const double tau = v[d_ * N_];
        eval(sys_, x, Vec::Constant(N_, tau), nullptr, nullptr, out, parallel);
        return ordered_mean(out.lam) - tau * ordered_mean(out.Hval);
    }
    const Vec eta = v.segment(d_ * N_, N_);
    const Vec zeta = v.segment(d_ * N_ + N_, N_);
    eval(sys_, x, eta, &eta, &zeta, out, parallel);
    return ordered_mean(out.lam) - ordered_mean(out.cross) - mean_product(eta, out.Hval);
}

Vec FlowProblem::gradient(const Vec& v) const
{
    const Eigen::Map<const Mat> x(v.data(), d_, N_);
    PointwiseOut out;
    Vec g(dim());
    if (kind_ == FlowSystem::rabinowitz) {
        eval(sys_, x, Vec::Constant(N_, v[d_ * N_]), nullptr, nullptr, out, parallel);
        g.head(d_ * N_) = Eigen::Map<const Vec>(out.gx.data(), d_ * N_);
        g[d_ * N_] = -ordered_mean(out.Hval);
        return g;
    }
    const Vec eta = v.segment(d_ * N_, N_);
    const Vec zeta = v.segment(d_ * N_ + N_, N_);
    eval(sys_, x, eta, &eta, &zeta, out, parallel);
    g.head(d_ * N_) = Eigen::Map<const Vec>(out.gx.data(), d_ * N_);
    g.segment(d_ * N_, N_) = out.geta;
    g.segment(d_ * N_ + N_, N_) = out.gzeta;
    return g;
}

Vec FlowProblem::hessian_apply(const Vec& v, const Vec& dv) const
{
    const Eigen::Map<const Mat> x(v.data(), d_, N_);
    const Eigen::Map<const Mat> dx(dv.data(), d_, N_);
    const bool ext = kind_ == FlowSystem::extended;
    Vec out = Vec::Zero(dim());
    Eigen::Map<Mat> gx(out.data(), d_, N_);
    const Mat& J = sys_.J();
    double dtau_sum = 0;
    for (int j = 0; j < N_; ++j) {
        const int jp = (j + 1) % N_, jm = (j + N_ - 1) % N_;
        Vec xj = x.col(j);
        Vec grad = sys_.grad_H(xj);
        double w = ext ? v[d_ * N_ + j] : v[d_ * N_];
        double dw = ext ? dv[d_ * N_ + j] : dv[d_ * N_];
        Vec ddx = 0.5 * N_ * (dx.col(jp) - dx.col(jm));
        gx.col(j) = -J * ddx - w * (sys_.hess_H(xj) * dx.col(j)) - dw * grad;
        double dH = grad.dot(dx.col(j));
        if (ext) {
            double dz = 0.5 * N_ * (dv[d_ * N_ + N_ + jp] - dv[d_ * N_ + N_ + jm]);
            double de = 0.5 * N_ * (dv[d_ * N_ + jp] - dv[d_ * N_ + jm]);
            out[d_ * N_ + j] = dz - dH;
            out[d_ * N_ + N_ + j] = -de;
        } else {
            dtau_sum += dH;
        }
    }
    if (!ext) out[d_ * N_] = -dtau_sum / N_;
    return out;
}

Mat FlowProblem::hessian(const Vec& v) const
{
    const int m = dim();
    Mat H(m, m);
    Vec e = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
        e[i] = 1;
        H.col(i) = hessian_apply(v, e);
        e[i] = 0;
    }
    return H;
}

Mat FlowProblem::linear_part() const
{
    const int m = dim();
    Mat L = Mat::Zero(m, m);
    const Mat& J = sys_.J();
    const double half = 0.5 * N_;
    for (int j = 0; j < N_; ++j) {
        const int jp = (j + 1) % N_, jm = (j + N_ - 1) % N_;
        // -J (x_{j+1} - x_{j-1}) N/2
        L.block(j * d_, jp * d_, d_, d_) += -half * J;
        L.block(j * d_, jm * d_, d_, d_) += half * J;
        if (kind_ == FlowSystem::extended) {
            const int e = d_ * N_, z = d_ * N_ + N_;
            L(e + j, z + jp) += half;
            L(e + j, z + jm) -= half;
            L(z + j, e + jp) -= half;
            L(z + j, e + jm) += half;
        }
    }
    return L;
}

double FlowProblem::eta_avg(const Vec& v) const
{
    return kind_ == FlowSystem::rabinowitz ? v[d_ * N_] : ordered_mean(v.segment(d_ * N_, N_));
}

double FlowProblem::zeta_avg(const Vec& v) const
{
    return kind_ == FlowSystem::rabinowitz ? 0.0 : ordered_mean(v.segment(d_ * N_ + N_, N_));
}

double FlowProblem::zeta_spread(const Vec& v) const
{
    if (kind_ == FlowSystem::rabinowitz) return 0;
    Vec z = v.segment(d_ * N_ + N_, N_);
    z.array() -= ordered_mean(z);
    return std::sqrt(z.squaredNorm() / N_);
}

double FlowProblem::mean_H(const Vec& v) const
{
    double s = 0;
    for (int j = 0; j < N_; ++j) s += sys_.H(v.segment(j * d_, d_));
    return s / N_;
}

double FlowProblem::max_abs_H(const Vec& v) const
{
    double m = 0;
    for (int j = 0; j < N_; ++j) m = std::max(m, std::abs(sys_.H(v.segment(j * d_, d_))));
    return m;
}

double FlowProblem::max_radius(const Vec& v) const
{
    double m = 0;
    for (int j = 0; j < N_; ++j) m = std::max(m, v.segment(j * d_, d_).norm());
    return m;
}

Vec FlowProblem::eta_direction() const
{
    Vec e = Vec::Zero(dim());
    if (kind_ == FlowSystem::rabinowitz)
        e[d_ * N_] = 1;
    else
        e.segment(d_ * N_, N_).setOnes();
    return e;
}

Vec FlowProblem::zeta_direction() const
{
    Vec e = Vec::Zero(dim());
    if (kind_ == FlowSystem::extended) e.segment(d_ * N_ + N_, N_).setOnes();
    return e;
}

double small_gradient_bound(const ModelSystem& sys)
{
    return 0.5 * sys.h_thr * std::min(1.0 / sys.sup_XH(), 1.0);
}

std::string FlowDiagnostics::csv() const
{
    std::string out = "step,s,action,grad_norm,energy_cum,eta_avg_residual,zeta_drift,max_abs_H,containment\n";
    char buf[320];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%ld,%.12e,%.15e,%.6e,%.12e,%.6e,%.6e,%.9e,%d\n", r.step, r.s, r.action,
                      r.grad_norm, r.energy_cum, r.eta_avg_residual, r.zeta_drift, r.max_abs_H,
                      r.containment ? 1 : 0);
        out += buf;
    }
    return out;
}

FlowResult integrate(const FlowProblem& prob, const Vec& v0, const FlowControls& ctl)
{
    if (v0.size() != prob.dim()) throw ConfigError("initial state has the wrong dimension");
    if (!(ctl.ds > 0) || !(ctl.eps_stop > 0) || !(ctl.ds_min > 0)) throw ConfigError("flow controls must be positive");
    if (!v0.allFinite()) throw ConfigError("initial state is not finite");
    const ModelSystem& sys = prob.system();
    const Slice* sl = ctl.slice;
    auto proj = [&](const Vec& g) { return sl ? sl->project(g) : g; };

    FlowResult res;
    FlowDiagnostics& dg = res.diag;
    Vec v = v0;
    Vec g = prob.gradient(v);
    Vec pg = proj(g);
    double A = prob.action(v);
    const double zeta0 = prob.zeta_avg(v);
    const double small_grad = small_gradient_bound(sys);
    dg.action_start = A;

    auto observe = [&](const Vec& state, const Vec& grad, FlowRecord& rec) {
        rec.grad_norm = prob.norm(grad);
        rec.max_abs_H = prob.max_abs_H(state);
        rec.containment = prob.max_radius(state) <= sys.r_plateau();
        rec.zeta_drift = std::abs(prob.zeta_avg(state) - zeta0);
        dg.contained = dg.contained && rec.containment;
        dg.max_zeta_drift = std::max(dg.max_zeta_drift, rec.zeta_drift);
        dg.sup_abs_H = std::max(dg.sup_abs_H, rec.max_abs_H);
        dg.max_zeta_spread = std::max(dg.max_zeta_spread, prob.zeta_spread(state));
        if (rec.grad_norm < small_grad) {
            ++dg.small_grad_checked;
            if (!(rec.max_abs_H < sys.h_thr)) dg.small_grad_ok = false;
        }
    };

    const double sgn = ctl.backward ? -1.0 : 1.0;
    FlowRecord rec;
    rec.action = A;
    observe(v, g, rec);
    if (ctl.record) dg.records.push_back(rec);
    if (ctl.store_states) {
        dg.states.push_back(v);
        dg.state_s.push_back(0);
    }

    // Semi-implicit: (I + ds P L) delta = -ds P g, factored per step size.
    Mat PL;
    std::map<double, Eigen::PartialPivLU<Mat>> lu;
    if (ctl.scheme == Scheme::semi_implicit) {
        Mat L = prob.linear_part();
        if (sl) {
            Mat B = sl->basis.transpose() * prob.weights().asDiagonal();
            PL = sl->basis * (B * L);
        } else {
            PL = L;
        }
    }

    // Explicit steps on a slice stay below 1/lambda_max, so every retained mode decays
    // without oscillation and the step sequence does not depend on rejections.
    double ds_cap = ctl.ds;
    if (sl && ctl.scheme == Scheme::explicit_euler) {
        double lmax = std::abs(sl->unstable_eig);
        for (int i = 0; i < sl->basis_eigs.size(); ++i) lmax = std::max(lmax, std::abs(sl->basis_eigs[i]));
        if (lmax > 0) ds_cap = std::min(ds_cap, 1.0 / lmax);
    }
    double ds = ds_cap, s = 0;
    long step = 0;
    while (true) {
        const double rg = prob.norm(pg);
        dg.final_restricted_grad = rg;
        if (rg < ctl.eps_stop) {
            dg.converged = true;
            break;
        }
        if (step >= ctl.max_steps) break;
        if (ctl.s_max > 0 && s >= ctl.s_max) break;
        if (sl && ctl.escape > 0 && sl->unstable.size()) {
            double c = sl->unstable_coord(v);
            if (std::abs(c) > ctl.escape) {
                dg.escaped = c > 0 ? 1 : -1;
                break;
            }
        }
        double h = ctl.s_max > 0 ? std::min(ds, ctl.s_max - s) : ds;
        Vec vn, delta;
        double An = 0;
        while (true) {
            if (ctl.scheme == Scheme::explicit_euler) {
                delta = -sgn * h * pg;
            } else {
                auto it = lu.find(h);
                if (it == lu.end()) {
                    Mat M = Mat::Identity(prob.dim(), prob.dim()) + sgn * h * PL;
                    it = lu.emplace(h, Eigen::PartialPivLU<Mat>(M)).first;
                    if (!(it->second.rcond() > 1e-12))
                        throw NumericalError("semi-implicit system is singular for step " + std::to_string(h));
                }
                delta = it->second.solve(Vec(-sgn * h * pg));
            }
            vn = v + delta;
            An = prob.action(vn);
            if (!std::isfinite(An) || !vn.allFinite()) throw NumericalError("gradient flow diverged (non-finite state)");
            // forward: descent of the action; backward: ascent
            const double descent = -sgn * prob.inner(g, delta);
            if (descent > 0 && sgn * (An - A) <= -ctl.armijo * descent + ctl.action_tol) break;
            ++dg.rejected;
            h *= 0.5;
            if (h < ctl.ds_min)
                throw NumericalError("step-size failure: action does not decrease at s = " + std::to_string(s));
        }
        Vec gn = prob.gradient(vn);
        const double e = -sgn * prob.inner(delta, 0.5 * (g + gn));
        dg.energy += e;
        dg.max_action_increase = std::max(dg.max_action_increase, sgn * (An - A));
        FlowRecord r;
        r.step = ++step;
        s += h;
        r.s = sgn * s;
        r.action = An;
        r.energy_cum = dg.energy;
        r.eta_avg_residual = std::abs((prob.eta_avg(vn) - prob.eta_avg(v)) / (sgn * h) - prob.mean_H(v));
        dg.max_eta_residual = std::max(dg.max_eta_residual, r.eta_avg_residual);
        observe(vn, gn, r);
        if (ctl.record) dg.records.push_back(r);
        if (ctl.store_states) {
            dg.states.push_back(vn);
            dg.state_s.push_back(r.s);
        }
        v = std::move(vn);
        g = std::move(gn);
        pg = proj(g);
        A = An;
        ds = std::min(ds_cap, 2 * h);
    }
    dg.steps = step;
    dg.s_end = sgn * s;
    dg.action_end = A;
    dg.zeta_spread_ok = dg.max_zeta_spread <= 2 * std::sqrt(std::max(dg.energy, 0.0)) + sys.sup_abs_H();
    res.state = std::move(v);
    return res;
}

std::string loop_json(const FlowProblem& prob, const Vec& v)
{
    nlohmann::ordered_json j;
    j["system"] = prob.kind() == FlowSystem::rabinowitz ? "rabinowitz" : "extended";
    j["N"] = prob.N();
    j["n"] = prob.system().n;
    const int d = 2 * prob.system().n, N = prob.N();
    nlohmann::ordered_json xs = nlohmann::ordered_json::array();
    for (int k = 0; k < N; ++k) {
        std::vector<double> p(v.data() + k * d, v.data() + (k + 1) * d);
        xs.push_back(p);
    }
    j["x"] = xs;
    if (prob.kind() == FlowSystem::rabinowitz) {
        j["tau"] = v[d * N];
    } else {
        j["eta"] = std::vector<double>(v.data() + d * N, v.data() + d * N + N);
        j["zeta"] = std::vector<double>(v.data() + d * N + N, v.data() + d * N + 2 * N);
    }
    return j.dump(1) + "\n";
}


Vec loop_from_json(const FlowProblem& prob, const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("loop json: ") + e.what());
    }
    const bool rab = prob.kind() == FlowSystem::rabinowitz;
    const int d = 2 * prob.system().n, N = prob.N();
    try {
        if (j.at("system").get<std::string>() != (rab ? "rabinowitz" : "extended"))
            throw ConfigError("loop json: system does not match");
        if (j.at("n").get<int>() != prob.system().n || j.at("N").get<int>() != N)
            throw ConfigError("loop json: n or N does not match");
        Vec v(prob.dim());
        const auto& xs = j.at("x");
        if (static_cast<int>(xs.size()) != N) throw ConfigError("loop json: x needs N points");
        for (int k = 0; k < N; ++k) {
            auto p = xs[k].get<std::vector<double>>();
            if (static_cast<int>(p.size()) != d) throw ConfigError("loop json: point of wrong dimension");
            for (int i = 0; i < d; ++i) v[k * d + i] = p[i];
        }
        if (rab) {
            v[d * N] = j.at("tau").get<double>();
        } else {
            auto eta = j.at("eta").get<std::vector<double>>(), zeta = j.at("zeta").get<std::vector<double>>();
            if (static_cast<int>(eta.size()) != N || static_cast<int>(zeta.size()) != N)
                throw ConfigError("loop json: eta and zeta need N values");
            for (int k = 0; k < N; ++k) v[d * N + k] = eta[k], v[d * N + N + k] = zeta[k];
        }
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("loop json: ") + e.what());
    }
}

}
