#include "rfhlab/rsindex.hpp"
#include "rfhlab/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rfh {

int HalfInteger::as_integer() const
{
    if (!is_integer()) throw InvariantError("half-integer " + str() + " is not an integer");
    return twice_value / 2;
}

std::string HalfInteger::str() const
{
    if (is_integer()) return std::to_string(twice_value / 2);
    return std::to_string(twice_value) + "/2";
}

SymplecticPath::SymplecticPath(Mat structure, std::vector<double> t, std::vector<Mat> samples, MatFn eval,
                               MatFn tangent, MatFn generator)
    : J_(std::move(structure)), t_(std::move(t)), samples_(std::move(samples)), eval_(std::move(eval)),
      tangent_(std::move(tangent)), generator_(std::move(generator))
{
    if (t_.size() != samples_.size() || t_.size() < 2)
        throw ConfigError("SymplecticPath: need at least two samples with matching times");
}

Mat SymplecticPath::generator(double t) const
{
    if (!generator_) throw ConfigError("path has no generator S(t)");
    return generator_(t);
}

void SymplecticPath::validate(double tol) const
{
    if (t_.front() != 0.0 || t_.back() != 1.0) throw InvariantError("path samples must span [0,1]");
    for (size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw InvariantError("path times not strictly increasing");
    const int d = dim();
    if ((samples_[0] - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > tol)
        throw InvariantError("path does not start at the identity");
    for (size_t i = 0; i < samples_.size(); ++i) {
        double scale = std::max(1.0, samples_[i].squaredNorm());
        if (symplectic_defect(samples_[i], J_) > tol * scale)
            throw InvariantError("path sample " + std::to_string(i) + " not symplectic");
    }
    if (generator_) {
        // Central differences against J S Gamma at a few interior points.
        const double h = 1e-5;
        for (int k = 1; k < 8; ++k) {
            double t = k / 8.0;
            Mat fd = (at(t + h) - at(t - h)) / (2 * h);
            Mat ex = J_ * generator(t) * at(t);
            double scale = std::max(1.0, ex.norm());
            if ((fd - ex).norm() > 1e-3 * scale)
                throw InvariantError("path derivative does not match J S Gamma at t=" + std::to_string(t));
        }
    }
}

static std::vector<double> uniform_times(int n)
{
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = static_cast<double>(i) / (n - 1);
    t.back() = 1.0;
    return t;
}

SymplecticPath closed_form_path(const Mat& J, MatFn eval, MatFn generator, int nsamples)
{
    auto t = uniform_times(std::max(nsamples, 2));
    std::vector<Mat> s;
    s.reserve(t.size());
    for (double ti : t) s.push_back(eval(ti));
    return SymplecticPath(J, t, s, eval, generator, generator);
}

SymplecticPath integrate_generator(const Mat& J, MatFn S, int steps)
{
    if (steps < 1) throw ConfigError("integrate_generator: steps must be positive");
    const int d = static_cast<int>(J.rows());
    const double h = 1.0 / steps;
    auto t = uniform_times(steps + 1);
    auto gens = std::make_shared<std::vector<Mat>>();
    auto mats = std::make_shared<std::vector<Mat>>();
    mats->push_back(Mat::Identity(d, d));
    for (int k = 0; k < steps; ++k) {
        Mat Sm = SymmetricForm(S((k + 0.5) * h)).entries();
        gens->push_back(Sm);
        Mat step = (h * (J * Sm)).exp();
        mats->push_back(step * mats->back());
    }
    auto seg = [steps](double t) { return std::clamp(static_cast<int>(std::floor(t * steps)), 0, steps - 1); };
    auto eval = [=](double tt) -> Mat {
        int k = seg(tt);
        double dt = tt - static_cast<double>(k) / steps;
        return ((dt * (J * (*gens)[k])).exp()) * (*mats)[k];
    };
    auto tangent = [=](double tt) -> Mat { return (*gens)[seg(tt)]; };
    return SymplecticPath(J, t, *mats, eval, tangent, S);
}

SymplecticPath interpolated_path(const Mat& J, std::vector<double> t, std::vector<Mat> samples)
{
    if (t.size() != samples.size() || t.size() < 2) throw ConfigError("interpolated_path: bad sample list");
    const size_t n = t.size();
    auto logs = std::make_shared<std::vector<Mat>>();
    for (size_t i = 0; i + 1 < n; ++i) {
        Mat step = samples[i + 1] * samples[i].inverse();
        Mat L = step.log();
        if (!L.allFinite()) throw NumericalError("interpolated_path: matrix logarithm failed; sample more densely");
        logs->push_back(L);
    }
    auto tt = std::make_shared<std::vector<double>>(t);
    auto ms = std::make_shared<std::vector<Mat>>(samples);
    auto seg = [tt](double x) {
        auto it = std::upper_bound(tt->begin(), tt->end(), x);
        long k = static_cast<long>(it - tt->begin()) - 1;
        return static_cast<size_t>(std::clamp<long>(k, 0, static_cast<long>(tt->size()) - 2));
    };
    auto eval = [=](double x) -> Mat {
        size_t k = seg(x);
        double th = (x - (*tt)[k]) / ((*tt)[k + 1] - (*tt)[k]);
        return (th * (*logs)[k]).exp() * (*ms)[k];
    };
    auto tangent = [=](double x) -> Mat {
        size_t k = seg(x);
        Mat S = -J * (*logs)[k] / ((*tt)[k + 1] - (*tt)[k]);
        return SymmetricForm(S).entries();
    };
    return SymplecticPath(J, t, samples, eval, tangent, MatFn{});
}

SymplecticPath identity_path(int m)
{
    Mat J = standard_j(m);
    const int d = 2 * m;
    return closed_form_path(
        J, [d](double) { return Mat(Mat::Identity(d, d)); }, [d](double) { return Mat(Mat::Zero(d, d)); }, 2);
}

SymplecticPath rotation_path(double turns)
{
    Mat J = standard_j(1);
    const double w = 2 * std::numbers::pi * turns;
    return closed_form_path(
        J,
        [J, w](double t) { return Mat(std::cos(w * t) * Mat::Identity(2, 2) + std::sin(w * t) * J); },
        [w](double) { return Mat(w * Mat::Identity(2, 2)); }, 65);
}

Mat theta_structure()
{
    return block_diag(standard_j(1), Mat(-standard_j(1)));
}

SymplecticPath theta_path(double tau, double hp, double hpp, int nsamples)
{
    if (!(hp > 0)) throw ConfigError("theta_path: hp must be positive");
    if (hpp == 0) throw ConfigError("theta_path: hpp must be nonzero");
    Mat N = Mat::Zero(4, 4);
    N(0, 1) = tau * hpp;
    N(0, 2) = hp;
    N(3, 1) = hp;
    Mat J = theta_structure();
    Mat S = SymmetricForm(-J * N).entries();
    return closed_form_path(
        J, [N](double t) { return Mat(Mat::Identity(4, 4) + t * N); }, [S](double) { return S; }, nsamples);
}

SymplecticPath perturbed_path(const SymplecticPath& p, double delta, int steps)
{
    if (!p.has_generator()) throw ConfigError("perturbed_path: path has no generator S(t)");
    const int d = p.dim();
    auto S = [p, delta, d](double t) { return Mat(p.generator(t) - delta * Mat::Identity(d, d)); };
    SymplecticPath r = integrate_generator(p.structure(), S, steps);
    for (const Mat& m : r.samples()) {
        double scale = std::max(1.0, m.squaredNorm());
        if (symplectic_defect(m, p.structure()) > 1e-9 * scale)
            throw NumericalError("perturbed_path: symplecticity lost; increase steps");
    }
    return r;
}

static std::vector<double> merge_times(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> t;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(t));
    t.erase(std::unique(t.begin(), t.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
            t.end());
    return t;
}

SymplecticPath block_diag(const SymplecticPath& a, const SymplecticPath& b)
{
    Mat J = block_diag(a.structure(), b.structure());
    auto t = merge_times(a.times(), b.times());
    auto eval = [a, b](double x) { return block_diag(a.at(x), b.at(x)); };
    auto tangent = [a, b](double x) { return block_diag(a.tangent_form(x), b.tangent_form(x)); };
    MatFn gen;
    if (a.has_generator() && b.has_generator())
        gen = [a, b](double x) { return block_diag(a.generator(x), b.generator(x)); };
    std::vector<Mat> s;
    for (double x : t) s.push_back(eval(x));
    return SymplecticPath(J, t, s, eval, tangent, gen);
}

SymplecticPath conjugate(const SymplecticPath& p, const Mat& psi)
{
    if (symplectic_defect(psi, p.structure()) > 1e-9 * std::max(1.0, psi.squaredNorm()))
        throw ConfigError("conjugate: Psi is not symplectic for the path structure");
    Mat inv = psi.inverse();
    Mat invT = inv.transpose();
    auto eval = [p, psi, inv](double x) { return Mat(psi * p.at(x) * inv); };
    auto tangent = [p, inv, invT](double x) { return SymmetricForm(invT * p.tangent_form(x) * inv).entries(); };
    MatFn gen;
    if (p.has_generator())
        gen = [p, inv, invT](double x) { return SymmetricForm(invT * p.generator(x) * inv).entries(); };
    std::vector<Mat> s;
    for (double x : p.times()) s.push_back(eval(x));
    return SymplecticPath(p.structure(), p.times(), s, eval, tangent, gen);
}

// ---------------------------------------------------------------------------
// Crossing-form engine.

namespace {

struct Reducer {
    Mat Qperp;   // basis of the complement of the persistent kernel
    Mat Qomega;  // basis of its omega-annihilator's complement, same size
    int persistent = 0;

    Mat reduced(const Mat& G) const
    {
        const int d = static_cast<int>(G.rows());
        return Qomega.transpose() * (G - Mat::Identity(d, d)) * Qperp;
    }
};

Reducer make_reducer(const SymplecticPath& p, const std::vector<double>& grid)
{
    const int d = p.dim();
    // Stack Gamma(t)-I over a spread of grid points.
    int stride = std::max<int>(1, static_cast<int>(grid.size()) / 64);
    std::vector<Mat> blocks;
    for (size_t i = 0; i < grid.size(); i += stride) blocks.push_back(p.at(grid[i]) - Mat::Identity(d, d));
    blocks.push_back(p.at(grid.back()) - Mat::Identity(d, d));
    Mat stack(static_cast<Eigen::Index>(blocks.size()) * d, d);
    for (size_t i = 0; i < blocks.size(); ++i) stack.block(static_cast<Eigen::Index>(i) * d, 0, d, d) = blocks[i];
    Mat P = null_space(stack, 1e-9);
    Reducer r;
    r.persistent = static_cast<int>(P.cols());
    r.Qperp = orth_complement(P, d);
    Mat JP = p.structure() * P;
    if (JP.cols() > 0) {
        Eigen::HouseholderQR<Mat> qr(JP);
        JP = qr.householderQ() * Mat::Identity(d, JP.cols());
    }
    r.Qomega = orth_complement(JP, d);
    return r;
}

struct Probe {
    double smin = 0;
    double det = 0;
    double logdet = 0;  // sum of log singular values
    double thr = 0;
};

class Engine {
public:
    Engine(const SymplecticPath& p, const Reducer& r, const IndexOptions& o) : p_(p), r_(r), o_(o) {}

    Probe probe(double t) const
    {
        Mat G = p_.at(t);
        Probe pr;
        pr.thr = o_.kernel_tol * std::max(1.0, G.norm());
        Mat R = r_.reduced(G);
        if (R.rows() == 0) {
            pr.smin = std::numeric_limits<double>::infinity();
            pr.det = 1;
            return pr;
        }
        Eigen::JacobiSVD<Mat> svd(R);
        const Vec& s = svd.singularValues();
        pr.smin = s.tail(1)(0);
        for (int i = 0; i < s.size(); ++i) pr.logdet += std::log(s[i] + 1e-300);
        pr.det = R.determinant();
        return pr;
    }

    // Orthonormal kernel of the reduced matrix at t, lifted to R^{2m}.
    Mat kernel(double t) const
    {
        Mat G = p_.at(t);
        double thr = o_.kernel_tol * std::max(1.0, G.norm());
        Mat R = r_.reduced(G);
        if (R.rows() == 0) return Mat(G.rows(), 0);
        Eigen::JacobiSVD<Mat> svd(R, Eigen::ComputeFullV);
        const Vec& s = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < s.size(); ++i)
            if (s[i] > thr) ++rank;
        Mat V = svd.matrixV().rightCols(R.cols() - rank);
        return r_.Qperp * V;
    }

    template <class F>
    double golden_min(double a, double b, F f) const
    {
        const double g = (std::sqrt(5.0) - 1) / 2;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = f(probe(c)), fd = f(probe(d));
        while (b - a > o_.time_tol) {
            if (fc <= fd) {
                b = d; d = c; fd = fc;
                c = b - g * (b - a);
                fc = f(probe(c));
            } else {
                a = c; c = d; fc = fd;
                d = a + g * (b - a);
                fd = f(probe(d));
            }
        }
        return 0.5 * (a + b);
    }

    double det_root(double a, double b) const
    {
        double fa = probe(a).det;
        while (b - a > o_.time_tol) {
            double m = 0.5 * (a + b);
            double fm = probe(m).det;
            if ((fm > 0) == (fa > 0)) { a = m; fa = fm; }
            else b = m;
        }
        return 0.5 * (a + b);
    }

    Crossing crossing_at(double t, double s_eval, bool endpoint) const
    {
        Crossing c;
        c.t = t;
        c.endpoint = endpoint;
        c.kernel_basis = kernel(t);
        Mat S = p_.tangent_form(s_eval);
        c.form = SymmetricForm(c.kernel_basis.transpose() * S * c.kernel_basis);
        double scale = std::max(1.0, c.form.size() ? c.form.entries().cwiseAbs().maxCoeff() : 0.0);
        if (endpoint) {
            c.sig = signature(c.form, o_.tol * scale, false);
        } else {
            try {
                c.sig = signature(c.form, o_.tol * scale, true);
            } catch (const DegenerateForm&) {
                throw IrregularCrossing(t, "rs_index: degenerate crossing form at interior time t=" +
                                                std::to_string(t) + "; perturb the path (perturbed_path)");
            }
        }
        return c;
    }

private:
    const SymplecticPath& p_;
    const Reducer& r_;
    const IndexOptions& o_;
};

}  // namespace

IndexResult rs_index_detail(const SymplecticPath& p, double a, double b, const IndexOptions& opt)
{
    if (!(a >= 0 && b <= 1 && a < b)) throw ConfigError("rs_index: need 0 <= a < b <= 1");
    std::vector<double> grid;
    for (double t : p.times())
        if (t >= a && t <= b) grid.push_back(t);
    for (int i = 0; i < opt.scan_points; ++i) grid.push_back(a + (b - a) * i / (opt.scan_points - 1));
    grid.push_back(a);
    grid.push_back(b);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(), [](double x, double y) { return std::abs(x - y) < 1e-13; }),
               grid.end());

    Reducer red = make_reducer(p, grid);
    Engine eng(p, red, opt);
    IndexResult res;
    res.persistent_dim = red.persistent;
    if (red.Qperp.cols() == 0) return res;

    std::vector<Probe> pr(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) pr[i] = eng.probe(grid[i]);

    const double edge = 1e-9;
    std::vector<double> found;
    auto add_interior = [&](double t) {
        if (t - a < edge || b - t < edge) return;
        for (double f : found)
            if (std::abs(f - t) < 1e-8) return;
        found.push_back(t);
    };

    // Candidates: local minima of log|det| (wide dips even when other singular
    // values are small) and of the smallest singular value.
    auto by_logdet = [](const Probe& q) { return q.logdet; };
    auto by_smin = [](const Probe& q) { return q.smin; };
    for (size_t i = 1; i + 1 < grid.size(); ++i) {
        if (pr[i].logdet <= pr[i - 1].logdet && pr[i].logdet <= pr[i + 1].logdet) {
            double t = eng.golden_min(grid[i - 1], grid[i + 1], by_logdet);
            Probe q = eng.probe(t);
            if (q.smin <= q.thr) add_interior(t);
        }
        if (pr[i].smin <= pr[i - 1].smin && pr[i].smin <= pr[i + 1].smin) {
            double t = eng.golden_min(grid[i - 1], grid[i + 1], by_smin);
            Probe q = eng.probe(t);
            if (q.smin <= q.thr) add_interior(t);
        }
    }
    // Determinant sign changes must be explained by a crossing.
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        if ((pr[i].det > 0) == (pr[i + 1].det > 0)) continue;
        if (pr[i].smin <= pr[i].thr || pr[i + 1].smin <= pr[i + 1].thr) continue;  // endpoint kernels
        double t = eng.det_root(grid[i], grid[i + 1]);
        Probe q = eng.probe(t);
        bool near = false;
        for (double f : found)
            if (std::abs(f - t) < 1e-6) near = true;
        if (near) continue;
        if (q.smin <= q.thr) add_interior(t);
        else
            throw ResolutionError("rs_index: determinant changes sign near t=" + std::to_string(t) +
                                  " without a resolved kernel; sample the path more finely");
    }
    std::sort(found.begin(), found.end());

    const double inset = 1e-12;
    if (pr.front().smin <= pr.front().thr) {
        Crossing c = eng.crossing_at(a, a + inset, true);
        if (c.kernel_basis.cols() > 0) res.crossings.push_back(c);
    }
    for (double t : found) res.crossings.push_back(eng.crossing_at(t, t, false));
    if (pr.back().smin <= pr.back().thr) {
        Crossing c = eng.crossing_at(b, b - inset, true);
        if (c.kernel_basis.cols() > 0) res.crossings.push_back(c);
    }
    int twice = 0;
    for (const Crossing& c : res.crossings) twice += c.endpoint ? c.sig : 2 * c.sig;
    res.value = HalfInteger{twice};
    return res;
}

IndexResult rs_index_detail(const SymplecticPath& p, const IndexOptions& opt)
{
    return rs_index_detail(p, 0.0, 1.0, opt);
}

HalfInteger rs_index(const SymplecticPath& p, double tol)
{
    IndexOptions o;
    o.tol = tol;
    return rs_index_detail(p, o).value;
}

HalfInteger rs_index(const SymplecticPath& p, double a, double b, double tol)
{
    IndexOptions o;
    o.tol = tol;
    return rs_index_detail(p, a, b, o).value;
}

}
