#include "rfhlab/symlin.hpp"
#include "rfhlab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace rfh {

Mat standard_j(int m)
{
    if (m < 1) throw ConfigError("standard_structure: m must be >= 1, got " + std::to_string(m));
    Mat J = Mat::Zero(2 * m, 2 * m);
    J.block(0, m, m, m) = -Mat::Identity(m, m);
    J.block(m, 0, m, m) = Mat::Identity(m, m);
    return J;
}

StandardStructure standard_structure(int m)
{
    StandardStructure s;
    s.m = m;
    s.J = standard_j(m);
    return s;
}

SymmetricForm::SymmetricForm(const Mat& a)
{
    if (a.rows() != a.cols()) throw ConfigError("SymmetricForm: matrix not square");
    a_ = 0.5 * (a + a.transpose());
}

static Vec eigenvalues_of(const SymmetricForm& f)
{
    if (f.size() == 0) return Vec();
    Eigen::SelfAdjointEigenSolver<Mat> es(f.entries(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

int signature(const SymmetricForm& f, double tol, bool require_nondegenerate)
{
    Vec ev = eigenvalues_of(f);
    int pos = 0, neg = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] > tol) ++pos;
        else if (ev[i] < -tol) ++neg;
        else if (require_nondegenerate)
            throw DegenerateForm("signature: eigenvalue " + std::to_string(ev[i]) + " within tol of zero");
    }
    return pos - neg;
}

int nullity(const SymmetricForm& f, double tol)
{
    Vec ev = eigenvalues_of(f);
    int z = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) <= tol) ++z;
    return z;
}

double symplectic_defect(const Mat& M, const Mat& J)
{
    return (M.transpose() * J * M - J).cwiseAbs().maxCoeff();
}

bool is_symplectic(const Mat& M, const Mat& J, double tol)
{
    if (M.rows() != M.cols() || M.rows() % 2 != 0)
        throw ConfigError("is_symplectic: need a square even-dimensional matrix");
    if (J.rows() != M.rows()) throw ConfigError("is_symplectic: structure dimension mismatch");
    return symplectic_defect(M, J) <= tol;
}

bool is_symplectic(const Mat& M, double tol)
{
    if (M.rows() != M.cols() || M.rows() % 2 != 0)
        throw ConfigError("is_symplectic: need a square even-dimensional matrix");
    return is_symplectic(M, standard_j(static_cast<int>(M.rows() / 2)), tol);
}

SymplecticMatrix::SymplecticMatrix(const Mat& m, double tol)
    : SymplecticMatrix(m, standard_j(static_cast<int>(m.rows() / 2)), tol) {}

SymplecticMatrix::SymplecticMatrix(const Mat& m, const Mat& J, double tol) : m_(m), tol_(tol)
{
    if (!is_symplectic(m, J, tol))
        throw InvariantError("SymplecticMatrix: defect " + std::to_string(symplectic_defect(m, J)) +
                             " exceeds tol");
    if (m.determinant() <= 0) throw InvariantError("SymplecticMatrix: non-positive determinant");
}

Mat block_diag(const Mat& a, const Mat& b)
{
    Mat r = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    r.topLeftCorner(a.rows(), a.cols()) = a;
    r.bottomRightCorner(b.rows(), b.cols()) = b;
    return r;
}

Mat null_space(const Mat& a, double rel_tol)
{
    const int n = static_cast<int>(a.cols());
    if (a.rows() == 0) return Mat::Identity(n, n);
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    double thr = rel_tol * std::max(1.0, s.size() ? s[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > thr) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

Mat orth_complement(const Mat& q, int dim)
{
    if (q.cols() == 0) return Mat::Identity(dim, dim);
    return null_space(q.transpose(), 1e-10);
}

}
