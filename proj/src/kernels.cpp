#include "rfhlab/kernels.hpp"
#include "rfhlab/errors.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace rfh {

namespace {

int g_threads = 0;

inline void point(const ModelSystem& sys, const Mat& x, const Vec& w, const Vec* eta, const Vec* zeta,
                  PointwiseOut& out, int j, int N)
{
    const int jp = (j + 1) % N, jm = (j + N - 1) % N;
    const double half = 0.5 * N;
    Vec dx = half * (x.col(jp) - x.col(jm));
    Vec xj = x.col(j);
    Vec Jdx = sys.J() * dx;
    double h = sys.H(xj);
    out.gx.col(j) = -Jdx - w[j] * sys.grad_H(xj);
    out.Hval[j] = h;
    out.lam[j] = 0.5 * (sys.J() * xj).dot(dx);
    if (eta && zeta) {
        double dz = half * ((*zeta)[jp] - (*zeta)[jm]);
        double de = half * ((*eta)[jp] - (*eta)[jm]);
        out.geta[j] = dz - h;
        out.gzeta[j] = -de;
        out.cross[j] = (*zeta)[j] * de;
    }
}

void prepare(const Mat& x, const Vec* eta, PointwiseOut& out)
{
    const int N = static_cast<int>(x.cols());
    out.gx.resize(x.rows(), N);
    out.Hval.resize(N);
    out.lam.resize(N);
    if (eta) {
        out.geta.resize(N);
        out.gzeta.resize(N);
        out.cross.resize(N);
    }
}

}

void pointwise_serial(const ModelSystem& sys, const Mat& x, const Vec& w, const Vec* eta, const Vec* zeta,
                      PointwiseOut& out)
{
    prepare(x, eta, out);
    const int N = static_cast<int>(x.cols());
    for (int j = 0; j < N; ++j) point(sys, x, w, eta, zeta, out, j, N);
}

void pointwise_parallel(const ModelSystem& sys, const Mat& x, const Vec& w, const Vec* eta, const Vec* zeta,
                        PointwiseOut& out)
{
    prepare(x, eta, out);
    const int N = static_cast<int>(x.cols());
    const int nt = g_threads > 0 ? g_threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int j = 0; j < N; ++j) point(sys, x, w, eta, zeta, out, j, N);
}

double ordered_mean(const Vec& v)
{
    double s = 0;
    for (int i = 0; i < v.size(); ++i) s += v[i];
    return s / static_cast<double>(v.size());
}

void set_thread_cap(int n) { g_threads = n > 0 ? n : 0; }
int thread_cap() { return g_threads; }

void thread_cap_from_env()
{
    const char* e = std::getenv("RFHLAB_THREADS");
    if (!e || !*e) return;
    try {
        int n = std::stoi(e);
        if (n < 1) throw ConfigError("RFHLAB_THREADS must be a positive integer");
        set_thread_cap(n);
    } catch (const std::invalid_argument&) {
        throw ConfigError("RFHLAB_THREADS must be a positive integer");
    }
}

}
