#include "rfhlab/errors.hpp"
#include "rfhlab/gradflow.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace rfh {

Vec Slice::project(const Vec& g) const
{
    Vec c = basis.transpose() * weights.cwiseProduct(g);
    return basis * c;
}

double Slice::unstable_coord(const Vec& v) const
{
    if (unstable.size() == 0) return 0;
    return (v - center).cwiseProduct(weights).dot(unstable);
}

namespace {

struct Spectrum {
    Vec ev;
    Mat U;  // columns: L2-orthonormal eigendirections (flat coordinates)
};

Spectrum hessian_spectrum(const FlowProblem& prob, const Vec& center)
{
    const Vec& w = prob.weights();
    const Vec sw = w.cwiseSqrt();
    const Vec isw = sw.cwiseInverse();
    Mat H = prob.hessian(center);
    // symmetric form of the L2 Hessian in orthonormal coordinates
    Mat K = sw.asDiagonal() * H * isw.asDiagonal();
    K = 0.5 * (K + K.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(K);
    if (es.info() != Eigen::Success) throw NumericalError("Hessian eigensolve failed");
    return {es.eigenvalues(), isw.asDiagonal() * es.eigenvectors()};
}

Slice make_slice(const FlowProblem& prob, const Vec& center, const Spectrum& sp, double lo, double hi)
{
    Slice s;
    s.center = center;
    s.weights = prob.weights();
    s.eigenvalues = sp.ev;
    std::vector<int> keep;
    for (int i = 0; i < sp.ev.size(); ++i)
        if (sp.ev[i] >= lo && sp.ev[i] <= hi) keep.push_back(i);
    s.frozen = static_cast<int>(sp.ev.size() - keep.size());
    s.basis.resize(prob.dim(), static_cast<int>(keep.size()));
    s.basis_eigs.resize(static_cast<int>(keep.size()));
    for (size_t c = 0; c < keep.size(); ++c) {
        s.basis.col(static_cast<int>(c)) = sp.U.col(keep[c]);
        s.basis_eigs[static_cast<int>(c)] = sp.ev[keep[c]];
    }
    return s;
}

}

Slice spectral_slice(const FlowProblem& prob, const Vec& center, double lo, double hi)
{
    if (!(lo < hi)) throw ConfigError("empty spectral window");
    return make_slice(prob, center, hessian_spectrum(prob, center), lo, hi);
}

Slice center_stable_slice(const FlowProblem& prob, const Vec& center, double cut)
{
    if (!(cut > 0)) throw ConfigError("slice cut must be positive");
    Slice s = make_slice(prob, center, hessian_spectrum(prob, center), -cut,
                         std::numeric_limits<double>::infinity());
    int negatives = 0;
    for (int c = 0; c < s.basis_eigs.size(); ++c)
        if (s.basis_eigs[c] < -1e-6) ++negatives;
    if (negatives > 1)
        throw NumericalError("slice keeps " + std::to_string(negatives) + " unstable directions; lower the cut");
    if (negatives == 1) {
        s.unstable = s.basis.col(0);
        s.unstable_eig = s.basis_eigs[0];
    }
    return s;
}

double discrete_period(int N, int k) { return N * std::sin(2 * M_PI * k / N); }

RabinowitzLoop discrete_critical_loop(const ModelSystem& sys, int N, int k)
{
    const int d = 2 * sys.n;
    RabinowitzLoop L;
    L.x.resize(d, N);
    Vec e1 = Vec::Zero(d);
    e1[0] = 1;
    const Mat& J = sys.J();
    for (int j = 0; j < N; ++j) {
        double th = 2 * M_PI * k * j / N;
        L.x.col(j) = std::cos(th) * e1 + std::sin(th) * (J * e1);
    }
    L.tau = k == 0 ? 0.0 : discrete_period(N, k);
    return L;
}

RabinowitzLoop constant_loop(const Vec& x0, int N, double tau)
{
    RabinowitzLoop L;
    L.x = x0.replicate(1, N);
    L.tau = tau;
    return L;
}

TargetMatch identify_target(const FlowProblem& prob, const Vec& v, int kmax)
{
    const double A = prob.action(v);
    const double tau = prob.eta_avg(v);
    const int d = 2 * prob.system().n, N = prob.N();
    double dist = 0;
    for (int j = 0; j < N; ++j) {
        double r = v.segment(j * d, d).norm() - 1.0;
        dist += r * r;
    }
    dist = std::sqrt(dist / N);
    TargetMatch best;
    double best_score = std::numeric_limits<double>::infinity();
    for (int k = -kmax; k <= kmax; ++k) {
        const double tk = k == 0 ? 0.0 : discrete_period(N, k);
        const double gap_a = std::abs(A - 0.5 * tk), gap_t = std::abs(tau - tk);
        const double score = gap_a + gap_t;
        if (score < best_score - 1e-12) {
            best_score = score;
            best = {k, gap_a, gap_t, dist};
        }
    }
    return best;
}

Vec stable_perturbation(const FlowProblem& prob, const Slice& slice, std::mt19937_64& rng, double amplitude)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec p = Vec::Zero(prob.dim());
    for (int c = 0; c < slice.basis.cols(); ++c) {
        const double lam = slice.basis_eigs[c];
        const double coef = nd(rng);
        if (lam > 1e-6) p += coef / (1.0 + lam * lam) * slice.basis.col(c);
    }
    const double nrm = prob.norm(p);
    if (!(nrm > 0)) return p;
    return (amplitude / nrm) * p;
}

ShootResult shoot(const FlowProblem& prob, const Slice& slice, const Vec& v0, FlowControls ctl, double bracket,
                  int max_trials)
{
    ctl.slice = &slice;
    ShootResult out;
    if (slice.unstable.size() == 0) {
        out.run = integrate(prob, v0, ctl);
        out.trials = 1;
        return out;
    }
    const double offset = prob.norm(v0 - slice.center);
    const double a0 = bracket > 0 ? bracket : 4 * offset + 1e-9;
    if (!(ctl.escape > 0)) ctl.escape = 0.5 * a0;
    auto run = [&](double alpha) {
        ++out.trials;
        FlowResult r = integrate(prob, v0 + alpha * slice.unstable, ctl);
        if (!r.diag.converged && r.diag.escaped == 0)
            throw NumericalError("shooting trial neither converged nor escaped within the step budget");
        return r;
    };
    double lo = -a0, hi = a0;
    FlowResult rlo = run(lo);
    if (rlo.diag.converged) return out.run = std::move(rlo), out.alpha = lo, out;
    FlowResult rhi = run(hi);
    if (rhi.diag.converged) return out.run = std::move(rhi), out.alpha = hi, out;
    if (rlo.diag.escaped == rhi.diag.escaped)
        throw NumericalError("shooting bracket does not separate the unstable direction");
    const int slo = rlo.diag.escaped;
    while (out.trials < max_trials) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        FlowResult r = run(mid);
        if (r.diag.converged) {
            out.run = std::move(r);
            out.alpha = mid;
            return out;
        }
        (r.diag.escaped == slo ? lo : hi) = mid;
    }
    throw NumericalError("shooting did not converge within the trial budget");
}

}
