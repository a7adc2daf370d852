#pragma once
#include "rfhlab/model.hpp"

namespace rfh {

// Pointwise quantities on the t-grid. x is d x N (one column per sample),
// w the weight multiplying grad H (tau, or eta_j), eta/zeta optional.
struct PointwiseOut {
    Mat gx;      // -J (Dx)_j - w_j grad H(x_j)
    Vec Hval;    // H(x_j)
    Vec lam;     // (J x_j).(Dx)_j / 2
    Vec geta;    // (D zeta)_j - H(x_j)
    Vec gzeta;   // -(D eta)_j
    Vec cross;   // zeta_j (D eta)_j
};

void pointwise_serial(const ModelSystem& sys, const Mat& x, const Vec& w, const Vec* eta, const Vec* zeta,
                      PointwiseOut& out);
void pointwise_parallel(const ModelSystem& sys, const Mat& x, const Vec& w, const Vec* eta, const Vec* zeta,
                        PointwiseOut& out);

// Ordered sum, identical for serial and parallel kernels.
double ordered_mean(const Vec& v);

// Caps the OpenMP worker count (0 leaves the runtime default).
void set_thread_cap(int n);
int thread_cap();
// Reads RFHLAB_THREADS if set.
void thread_cap_from_env();

}
