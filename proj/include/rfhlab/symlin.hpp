#pragma once
#include <Eigen/Dense>

namespace rfh {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// J_m on R^{2m} in (q_1..q_m, p_1..p_m) ordering: [[0,-I],[I,0]].
Mat standard_j(int m);

struct StandardStructure {
    int m = 0;
    Mat J;
    double omega(const Vec& u, const Vec& v) const { return u.dot(J * v); }
};

StandardStructure standard_structure(int m);

// Symmetrized on construction.
class SymmetricForm {
public:
    SymmetricForm() = default;
    explicit SymmetricForm(const Mat& a);
    const Mat& entries() const { return a_; }
    int size() const { return static_cast<int>(a_.rows()); }
    SymmetricForm operator-() const { return SymmetricForm(-a_); }
private:
    Mat a_;
};

// (#eig > tol) - (#eig < -tol). With require_nondegenerate, an eigenvalue
// inside [-tol, tol] throws DegenerateForm.
int signature(const SymmetricForm& f, double tol = 1e-9, bool require_nondegenerate = false);

// Number of eigenvalues with |lambda| <= tol.
int nullity(const SymmetricForm& f, double tol = 1e-9);

// ||M^T J M - J||_inf <= tol. J defaults to the standard structure.
bool is_symplectic(const Mat& M, double tol);
bool is_symplectic(const Mat& M, const Mat& J, double tol);

double symplectic_defect(const Mat& M, const Mat& J);

class SymplecticMatrix {
public:
    SymplecticMatrix(const Mat& m, double tol);
    SymplecticMatrix(const Mat& m, const Mat& J, double tol);
    const Mat& entries() const { return m_; }
    double tol() const { return tol_; }
private:
    Mat m_;
    double tol_;
};

Mat block_diag(const Mat& a, const Mat& b);

// Orthonormal basis of the null space of A: right singular vectors whose
// singular value is <= rel_tol * max(1, sigma_max).
Mat null_space(const Mat& a, double rel_tol);

// Orthonormal basis of the orthogonal complement of span(cols of Q), Q orthonormal.
Mat orth_complement(const Mat& q, int dim);

}
