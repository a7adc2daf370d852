#include "rfhlab/model.hpp"
#include "rfhlab/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <numbers>

namespace rfh {

namespace {
// Cubic Hermite basis and antiderivatives on [0,1].
double H00(double u) { return 2 * u * u * u - 3 * u * u + 1; }
double H10(double u) { return u * u * u - 2 * u * u + u; }
double dH00(double u) { return 6 * u * u - 6 * u; }
double dH10(double u) { return 3 * u * u - 4 * u + 1; }
double iH00(double u) { return u * u * u * u / 2 - u * u * u + u; }
double iH10(double u) { return u * u * u * u / 4 - 2 * u * u * u / 3 + u * u / 2; }
}

double Profile::dh(double r) const
{
    if (r <= r1) return r;
    if (r >= r2) return 0;
    double D = r2 - r1, u = (r - r1) / D;
    return r1 * H00(u) + D * H10(u);
}

double Profile::d2h(double r) const
{
    if (r <= r1) return 1;
    if (r >= r2) return 0;
    double D = r2 - r1, u = (r - r1) / D;
    return (r1 * dH00(u) + D * dH10(u)) / D;
}

double Profile::h(double r) const
{
    double base = 0.5 * (r1 * r1 - 1);
    if (r <= r1) return 0.5 * (r * r - 1);
    double D = r2 - r1;
    double u = std::min(1.0, (r - r1) / D);
    return base + D * (r1 * iH00(u) + D * iH10(u));
}

double ModelSystem::H(const Vec& x) const { return profile.h(x.norm()); }

Vec ModelSystem::grad_H(const Vec& x) const
{
    double r = x.norm();
    if (r <= profile.r1) return x;
    return (profile.dh(r) / r) * x;
}

Mat ModelSystem::hess_H(const Vec& x) const
{
    const int d = static_cast<int>(x.size());
    double r = x.norm();
    if (r <= profile.r1) return Mat::Identity(d, d);
    double a = profile.dh(r) / r;
    double b = profile.d2h(r) - a;
    return a * Mat::Identity(d, d) + (b / (r * r)) * (x * x.transpose());
}

Vec ModelSystem::X_H(const Vec& x) const { return J_ * grad_H(x); }

double ModelSystem::lambda(const Vec& x, const Vec& v) const { return 0.5 * (J_ * x).dot(v); }

double ModelSystem::sup_XH() const
{
    // |X_H| = |h'(r)|, maximal on the blend interval.
    double m = profile.r1;
    for (int i = 0; i <= 2000; ++i) {
        double r = profile.r1 + (profile.r2 - profile.r1) * i / 2000.0;
        m = std::max(m, std::abs(profile.dh(r)));
    }
    return m;
}

double ModelSystem::sup_abs_H() const { return std::max(0.5, std::abs(profile.h(profile.r2))); }

double ModelSystem::base_period() const { return 2 * std::numbers::pi / profile.dh(1.0); }

std::string ModelSystem::to_json() const
{
    nlohmann::ordered_json j;
    j["n"] = n;
    j["profile"] = {{"kind", "quadratic-capped"}, {"r1", profile.r1}, {"r2", profile.r2}};
    j["plateau_radius"] = profile.r2;
    j["h_thr"] = h_thr;
    j["alpha0"] = alpha0;
    return j.dump(2);
}

ModelSystem ModelSystem::from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model json: ") + e.what());
    }
    Profile p;
    int n = j.value("n", 1);
    if (j.contains("profile")) {
        p.r1 = j["profile"].value("r1", p.r1);
        p.r2 = j["profile"].value("r2", p.r2);
    }
    if (j.contains("plateau_radius")) p.r2 = j["plateau_radius"].get<double>();
    return make_model(n, p, j.value("h_thr", 0.1));
}

ModelSystem make_model(int n, Profile p, double h_thr)
{
    if (n < 1 || n > 3) throw ConfigError("model: n must be in 1..3");
    if (!(p.r1 > 1.0 && p.r2 > p.r1)) throw ConfigError("model: need 1 < r1 < r2");
    if (!(h_thr > 0)) throw ConfigError("model: h_thr must be positive");
    ModelSystem s;
    s.n = n;
    s.profile = p;
    s.h_thr = h_thr;
    s.J_ = standard_j(n);
    // N = {|h(r)| <= h_thr} is an annulus around r = 1 since h is increasing on (0, r2).
    if (p.h(p.r2) <= h_thr) throw ConfigError("model: h_thr must lie below the plateau value");
    double lo = std::sqrt(std::max(0.0, 1 - 2 * h_thr));
    double a = 1.0, b = p.r2;
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (a + b);
        (p.h(m) > h_thr ? b : a) = m;
    }
    double hi = a;
    double alpha = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4000; ++i) {
        double r = lo + (hi - lo) * i / 4000.0;
        alpha = std::min(alpha, 0.5 * r * p.dh(r));
    }
    if (!(alpha > 0)) throw ConfigError("model: lambda(X_H) not positive on N");
    s.alpha0 = alpha;
    return s;
}

HamiltonianData hamiltonian_data(const ModelSystem& sys, const ExtendedPoint& p)
{
    HamiltonianData d;
    double h = sys.H(p.x);
    d.Ht = p.tau * h;
    d.dx = p.tau * sys.X_H(p.x);
    d.dtau = 0;
    d.dsigma = h;
    return d;
}

ExtendedPoint extended_flow(const ModelSystem& sys, const ExtendedPoint& p, double t)
{
    double r = p.x.norm();
    double w = r > 0 ? (r <= sys.profile.r1 ? 1.0 : sys.profile.dh(r) / r) : 1.0;
    double ang = p.tau * t * w;
    ExtendedPoint q;
    q.x = std::cos(ang) * p.x + std::sin(ang) * (sys.J() * p.x);
    q.tau = p.tau;
    q.sigma = p.sigma + t * sys.H(p.x);
    return q;
}

std::vector<Vec> integrate_XH(const ModelSystem& sys, const Vec& x0, double T, int steps)
{
    std::vector<Vec> out{x0};
    double h = T / steps;
    Vec x = x0;
    for (int i = 0; i < steps; ++i) {
        Vec k1 = sys.X_H(x), k2 = sys.X_H(x + 0.5 * h * k1), k3 = sys.X_H(x + 0.5 * h * k2),
            k4 = sys.X_H(x + h * k3);
        x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        out.push_back(x);
    }
    return out;
}

Vec ReebOrbitFamily::point(const ModelSystem& sys, double t) const
{
    ExtendedPoint p{x0, tau, 0};
    return extended_flow(sys, p, t).x;
}

ReebOrbitFamily reeb_orbits(const ModelSystem& sys, double tau)
{
    ReebOrbitFamily f;
    f.tau = tau;
    f.x0 = Vec::Zero(2 * sys.n);
    f.x0[0] = 1.0;
    // Dimension of Sigma x R* (constants) or of the orbit family x R*: both 2n.
    f.dim_critical = 2 * sys.n;
    if (tau == 0) {
        f.constants = true;
        f.action = 0;
        return f;
    }
    double q = tau * sys.profile.dh(1.0) / (2 * std::numbers::pi);
    double k = std::round(q);
    if (std::abs(q - k) > 1e-12 || k == 0) {
        f.empty = true;
        f.dim_critical = 0;
        return f;
    }
    f.k = static_cast<int>(k);
    f.period = std::abs(tau);
    // int x^* lambda = tau h'(1) / 2 for a unit-speed loop scaled by tau.
    f.action = 0.5 * tau * sys.profile.dh(1.0);
    return f;
}

SymplecticPath linearized_flow_path(const ModelSystem& sys, int k, int steps)
{
    if (k == 0) throw ConfigError("linearized_flow_path: k must be nonzero");
    const int d = 2 * sys.n;
    double tau = 2 * std::numbers::pi * k / sys.profile.dh(1.0);
    ReebOrbitFamily f = reeb_orbits(sys, tau);
    Mat J = block_diag(sys.J(), standard_j(1));
    // Hessian of tau H(x) in (x, tau, sigma) along the orbit.
    auto S = [sys, f, tau, d](double t) {
        Vec x = f.point(sys, t);
        Mat s = Mat::Zero(d + 2, d + 2);
        s.topLeftCorner(d, d) = tau * sys.hess_H(x);
        Vec g = sys.grad_H(x);
        s.block(0, d, d, 1) = g;
        s.block(d, 0, 1, d) = g.transpose();
        return s;
    };
    if (steps <= 0) steps = 400 * std::abs(k);
    return integrate_generator(J, S, steps);
}

SymplecticPath contact_block_path(int n, int k)
{
    if (n < 2) throw ConfigError("contact_block_path: the contact block is trivial for n = 1");
    SymplecticPath rot = rotation_path(static_cast<double>(n) * k);
    if (n == 2) return rot;
    // rotation on the first (q,p) pair, identity elsewhere, in (q..., p...) ordering.
    const int m = n - 1;
    Mat J = standard_j(m);
    auto embed = [m](const Mat& r2) {
        Mat M = Mat::Identity(2 * m, 2 * m);
        M(0, 0) = r2(0, 0); M(0, m) = r2(0, 1);
        M(m, 0) = r2(1, 0); M(m, m) = r2(1, 1);
        return M;
    };
    auto eval = [rot, embed](double t) { return embed(rot.at(t)); };
    double w = 2 * std::numbers::pi * n * k;
    auto gen = [m, w](double) {
        Mat S = Mat::Zero(2 * m, 2 * m);
        S(0, 0) = w; S(m, m) = w;
        return S;
    };
    return closed_form_path(J, eval, gen, 65 * n * std::abs(k));
}

}
