#pragma once
#include "rfhlab/model.hpp"

#include <random>
#include <string>
#include <vector>

namespace rfh {

// Loops are sampled on the uniform grid t_j = j/N with periodic indexing;
// x is 2n x N, one column per sample. The L2 inner product is (1/N) sum_j.
struct RabinowitzLoop {
    Mat x;
    double tau = 0;
    int N() const { return static_cast<int>(x.cols()); }
};

struct ExtendedLoop {
    Mat x;
    Vec eta;
    Vec zeta;
    int N() const { return static_cast<int>(x.cols()); }
    double eta_avg() const;
    double zeta_avg() const;  // recomputed on every call
};

ExtendedLoop lift(const RabinowitzLoop& L, double sigma);

// Trapezoidal quadrature (uniform periodic grid) with centered differences.
double action_rabinowitz(const ModelSystem& sys, const RabinowitzLoop& L);
double action_extended(const ModelSystem& sys, const ExtendedLoop& L);

struct RabinowitzGradient {
    Mat gx;       // J_c (x' - tau X_H), J_c = -J the compatible complex structure
    double gtau;  // -int H(x)
    double norm() const;
};

struct ExtendedGradient {
    Mat gx;     // J_c (x' - eta X_H)
    Vec geta;   // zeta' - H(x)
    Vec gzeta;  // -eta'
    double norm() const;
};

RabinowitzGradient gradient_rabinowitz(const ModelSystem& sys, const RabinowitzLoop& L);
ExtendedGradient gradient_extended(const ModelSystem& sys, const ExtendedLoop& L);

enum class FlowSystem { rabinowitz, extended };

// Both systems flattened to one vector: x column-major, then tau (Rabinowitz)
// or eta followed by zeta (extended). Gradients are L2 gradients in the
// same layout; weights() holds the diagonal metric.
class FlowProblem {
public:
    FlowProblem(const ModelSystem& sys, FlowSystem kind, int N);

    const ModelSystem& system() const { return sys_; }
    FlowSystem kind() const { return kind_; }
    int N() const { return N_; }
    int dim() const { return static_cast<int>(w_.size()); }
    const Vec& weights() const { return w_; }

    Vec flatten(const RabinowitzLoop& L) const;
    Vec flatten(const ExtendedLoop& L) const;
    RabinowitzLoop rabinowitz(const Vec& v) const;
    ExtendedLoop extended(const Vec& v) const;

    double inner(const Vec& a, const Vec& b) const;
    double norm(const Vec& a) const;

    double action(const Vec& v) const;
    Vec gradient(const Vec& v) const;
    // Directional derivative of the gradient (Hessian applied to dv).
    Vec hessian_apply(const Vec& v, const Vec& dv) const;
    Mat hessian(const Vec& v) const;
    // Linear part of the gradient: -J D on x, (D zeta, -D eta) on (eta, zeta).
    Mat linear_part() const;

    double eta_avg(const Vec& v) const;   // tau for the Rabinowitz system
    double zeta_avg(const Vec& v) const;  // 0 for the Rabinowitz system
    double zeta_spread(const Vec& v) const;
    double mean_H(const Vec& v) const;
    double max_abs_H(const Vec& v) const;
    double max_radius(const Vec& v) const;
    Vec eta_direction() const;   // unit eta (or tau) constant shift
    Vec zeta_direction() const;  // unit zeta constant shift, zero for Rabinowitz

    bool parallel = true;

private:
    const ModelSystem& sys_;
    FlowSystem kind_;
    int N_;
    int d_;
    Vec w_;
};

// Affine center-stable slice through a critical loop: the span of Hessian
// eigendirections with eigenvalue >= -cut. Directions below -cut make the
// initial-value flow ill-posed and are frozen.
struct Slice {
    Vec center;
    Mat basis;       // L2-orthonormal columns
    Vec weights;
    Vec unstable;    // retained negative direction (empty when none)
    double unstable_eig = 0;
    Vec basis_eigs;  // eigenvalue of each basis column
    Vec eigenvalues; // full spectrum at the center, ascending
    int frozen = 0;

    Vec project(const Vec& g) const;
    double unstable_coord(const Vec& v) const;
};

Slice center_stable_slice(const FlowProblem& prob, const Vec& center, double cut = 2.0);
// Span of the eigendirections with eigenvalue in [lo, hi]; `unstable` stays empty.
Slice spectral_slice(const FlowProblem& prob, const Vec& center, double lo, double hi);

enum class Scheme { explicit_euler, semi_implicit };

struct FlowControls {
    Scheme scheme = Scheme::explicit_euler;
    double ds = 0.02;
    double ds_min = 1e-10;
    double armijo = 1e-4;
    double eps_stop = 1e-7;
    long max_steps = 1000000;
    double action_tol = 1e-12;   // slack for accepted steps (roundoff)
    const Slice* slice = nullptr;
    double escape = 0;           // stop once |unstable coordinate| exceeds this (0: off)
    bool record = true;
    bool backward = false;       // integrate towards s = -infinity (ascending the action)
    double s_max = 0;            // horizon |s| (0: none)
    bool store_states = false;
};

struct FlowRecord {
    long step = 0;
    double s = 0;
    double action = 0;
    double grad_norm = 0;       // full L2 gradient norm
    double energy_cum = 0;
    double eta_avg_residual = 0;
    double zeta_drift = 0;
    double max_abs_H = 0;
    bool containment = true;
};

struct FlowDiagnostics {
    std::vector<FlowRecord> records;  // index 0 is the start
    bool converged = false;
    int escaped = 0;                  // sign of the unstable coordinate on escape
    long steps = 0;
    long rejected = 0;
    double s_end = 0;
    double action_start = 0;
    double action_end = 0;
    double energy = 0;
    double final_restricted_grad = 0;
    double max_action_increase = 0;   // over accepted steps, <= action_tol
    double max_eta_residual = 0;
    double max_zeta_drift = 0;
    double max_zeta_spread = 0;
    double sup_abs_H = 0;
    bool small_grad_ok = true;
    long small_grad_checked = 0;
    bool contained = true;
    bool zeta_spread_ok = true;

    std::vector<Vec> states;          // with store_states, one per record
    std::vector<double> state_s;

    // Energy minus the action drop, the drop taken in the direction of travel.
    double energy_residual() const { return energy - std::abs(action_start - action_end); }
    std::string csv() const;
};

struct FlowResult {
    Vec state;
    FlowDiagnostics diag;
};

// Gradient bound below which |H| must be under h_thr: (h/2) min(1/sup|X_H|, 1).
double small_gradient_bound(const ModelSystem& sys);

FlowResult integrate(const FlowProblem& prob, const Vec& v0, const FlowControls& ctl);

// Discrete critical loops: x_j = exp(J 2 pi k j/N) e_1 with tau = N sin(2 pi k / N).
RabinowitzLoop discrete_critical_loop(const ModelSystem& sys, int N, int k);
double discrete_period(int N, int k);
RabinowitzLoop constant_loop(const Vec& x0, int N, double tau = 0);

struct TargetMatch {
    int k = 0;                 // 0 for constants
    double action_gap = 0;
    double tau_gap = 0;
    double l2_distance = 0;
};
// Nearest critical component by (action, |tau| bucket), ties by L2 distance.
TargetMatch identify_target(const FlowProblem& prob, const Vec& v, int kmax = 3);

// Random smooth perturbation inside the strictly stable part of the slice
// (coefficients damped by the eigenvalue), scaled to L2 norm `amplitude`.
Vec stable_perturbation(const FlowProblem& prob, const Slice& slice, std::mt19937_64& rng, double amplitude);

struct ShootResult {
    FlowResult run;
    double alpha = 0;   // coefficient along the retained unstable direction
    int trials = 0;
};
// Bisects the coefficient of v0 along the unstable slice direction until
// the restricted flow converges.
ShootResult shoot(const FlowProblem& prob, const Slice& slice, const Vec& v0, FlowControls ctl,
                  double bracket = 0, int max_trials = 200);

std::string loop_json(const FlowProblem& prob, const Vec& v);
// Inverse of loop_json; system, n and N must match the problem.
Vec loop_from_json(const FlowProblem& prob, const std::string& text);

}
