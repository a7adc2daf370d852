#pragma once
#include "rfhlab/gradflow.hpp"

#include <random>
#include <string>
#include <vector>

namespace rfh {

// Half-cylinder pair. minus holds Rabinowitz states at s_minus (0, then
// decreasing towards -S); plus holds extended states at s_plus (0, then
// increasing towards S). Only the s = 0 entries are read as input.
struct HybridState {
    std::vector<Vec> minus;
    std::vector<double> s_minus;
    std::vector<Vec> plus;
    std::vector<double> s_plus;
    double S = 20;
};

struct HybridControls {
    double S = 20;           // initial horizon
    double S_max = 160;      // horizon doubling stops here
    double ds = 0.02;
    int max_sweeps = 200;
    double sweep_tol = 1e-13;
    double cut = 0.5;        // spectral gap separating the half-cylinder slices
    double kappa = 1;        // eta+(0,t) = kappa * tau-(0)
    double end_tol = 1e-6;   // restricted gradient at both ends
    double coupling_tol = 1e-12;
    double action_tol = 1e-10;
};

struct HybridSweep {
    int sweep = 0;
    double datum_change = 0;
    double coupling_x = 0;
    double coupling_eta = 0;
    double action_minus_end = 0;  // A_H(v(-S))
    double action_mid_minus = 0;  // A_H(v(0))
    double action_mid_plus = 0;   // extended action of u(0)
    double action_plus_end = 0;   // extended action of u(S)
    double energy_minus = 0;
    double energy_plus = 0;
    double identity_residual = 0;
};

struct HybridDiagnostics {
    std::vector<HybridSweep> sweeps;
    FlowDiagnostics minus;  // last sweep
    FlowDiagnostics plus;
    bool converged = false;
    bool asymptotic_ok = false;
    double S = 0;
    double end_grad_minus = 0;
    double end_grad_plus = 0;
    double max_coupling_residual = 0;
    double energy_residual = 0;
    double max_abs_eta_minus = 0;
    double max_abs_eta_plus = 0;
    double max_zeta_osc_plus = 0;
    bool contained = true;
    int k = 0;               // component of the reference critical loop

    std::string csv() const;
};

struct HybridResult {
    HybridState state;
    HybridDiagnostics diag;
};

// Nearest discrete critical loop (component by tau bucket, phase by projection).
RabinowitzLoop nearest_critical_loop(const ModelSystem& sys, const RabinowitzLoop& L, int kmax = 3);

HybridState stationary_hybrid(const ModelSystem& sys, int N, int k, double sigma);
// Pair built from a Rabinowitz datum and a zeta loop so the coupling holds exactly.
HybridState coupled_hybrid(const ModelSystem& sys, const RabinowitzLoop& minus0, const Vec& zeta, double kappa = 1);

HybridResult hybrid_relax(const ModelSystem& sys, const HybridState& initial, const HybridControls& ctl = {});

struct HessianProbe {
    Vec v;   // Rabinowitz tangent (loop, then rho)
    Vec xi;  // zeta component of the lift
};

std::vector<HessianProbe> random_probes(const ModelSystem& sys, int N, std::mt19937_64& rng, int count);

// Max over probes of |d2 A_H(x)[(v,rho)] - d2 A_ext(lift)[(v,rho,xi)]|, both by
// central differences.
double hessian_agreement(const ModelSystem& sys, const RabinowitzLoop& xhat, double sigma,
                         const std::vector<HessianProbe>& probes, double h = 1e-4);

struct TransversalityReport {
    int null_dim = 0;        // bounded solutions of the linearized coupled problem
    int family_dims = 0;     // tangent to the critical family, removed by the Morse conditions
    int rstar_dims = 0;      // constant zeta shifts
    int other_dims = 0;      // anything else would break transversality
    bool only_rstar_neutral = false;
    bool zero_seed_ok = false;
    bool convex_ok = true;
    bool positive_cone_ok = true;
    int coupled_seeds = 0;
    int coupled_seeds_decaying = 0;
    std::vector<double> plus_rates;
    std::vector<double> minus_rates;
    double min_plus_eig = 0;   // spectral gaps of the two Hessians
    double max_minus_eig = 0;

    std::string json() const;
};

TransversalityReport auto_transversality_check(const ModelSystem& sys, const RabinowitzLoop& xhat, double sigma,
                                               std::mt19937_64& rng, int seeds = 20, double kappa = 1);

}
