#pragma once
#include "rfhlab/rsindex.hpp"
#include "rfhlab/symlin.hpp"

#include <string>

namespace rfh {

// Radial profile: h(r) = (r^2 - 1)/2 for r <= r1, a C^2 cubic-Hermite blend of
// h' down to 0 on [r1, r2], constant for r >= r2.
struct Profile {
    double r1 = 1.2;
    double r2 = 1.5;

    double h(double r) const;
    double dh(double r) const;
    double d2h(double r) const;
};

struct ModelSystem {
    int n = 1;
    Profile profile;
    double h_thr = 0.1;  // threshold defining N = H^{-1}([-h_thr, h_thr])
    double alpha0 = 0;   // min of lambda(X_H) on N, filled by make_model

    double r_plateau() const { return profile.r2; }
    double H(const Vec& x) const;
    Vec grad_H(const Vec& x) const;
    Mat hess_H(const Vec& x) const;
    Vec X_H(const Vec& x) const;  // J grad H
    double lambda(const Vec& x, const Vec& v) const;  // (J x).v / 2
    double sup_XH() const;        // max over R^{2n} of |X_H|
    double sup_abs_H() const;     // max over R^{2n} of |H|
    double base_period() const;   // 2 pi / h'(1)
    const Mat& J() const { return J_; }

    std::string to_json() const;
    static ModelSystem from_json(const std::string& text);

    Mat J_;
};

ModelSystem make_model(int n = 1, Profile p = {}, double h_thr = 0.1);

struct ExtendedPoint {
    Vec x;
    double tau = 0;
    double sigma = 0;
};

struct HamiltonianData {
    double Ht = 0;      // tau H(x)
    Vec dx;             // tau X_H(x)
    double dtau = 0;    // always 0
    double dsigma = 0;  // H(x)
};

HamiltonianData hamiltonian_data(const ModelSystem& sys, const ExtendedPoint& p);

// Exact flow of X_{tau H}: rotation of x by angle tau t h'(r)/r, sigma drifts by t H(x).
ExtendedPoint extended_flow(const ModelSystem& sys, const ExtendedPoint& p, double t);

// Classical RK4 trajectory of X_H, for conservation checks.
std::vector<Vec> integrate_XH(const ModelSystem& sys, const Vec& x0, double T, int steps);

struct ReebOrbitFamily {
    bool constants = false;
    bool empty = false;
    double tau = 0;
    int k = 0;            // signed multiplicity
    double period = 0;    // |tau|
    double action = 0;    // int x^* lambda
    int dim_critical = 0; // dimension of the family in the extended space including R*
    Vec x0;               // representative start point on Sigma

    // x(t) for t in [0,1] solving x' = tau X_H(x).
    Vec point(const ModelSystem& sys, double t) const;
};

ReebOrbitFamily reeb_orbits(const ModelSystem& sys, double tau);

// Linearized flow of X_{tau H} along the k-fold orbit through e_1, in the
// constant trivialization of R^{2n} x T*R with coordinates (x, tau, sigma).
SymplecticPath linearized_flow_path(const ModelSystem& sys, int k, int steps = 0);

// diag(rotation by nk turns, I) on R^{2n-2}: the contact block for n >= 2.
SymplecticPath contact_block_path(int n, int k);

}
