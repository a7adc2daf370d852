#pragma once
#include "rfhlab/symlin.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rfh {

struct HalfInteger {
    int twice_value = 0;

    static HalfInteger from_int(int k) { return HalfInteger{2 * k}; }
    static HalfInteger half(int k) { return HalfInteger{k}; }
    bool is_integer() const { return twice_value % 2 == 0; }
    int as_integer() const;  // throws InvariantError if not integral
    HalfInteger operator+(HalfInteger o) const { return {twice_value + o.twice_value}; }
    HalfInteger operator-(HalfInteger o) const { return {twice_value - o.twice_value}; }
    HalfInteger operator-() const { return {-twice_value}; }
    bool operator==(const HalfInteger&) const = default;
    std::string str() const;  // "3", "-1/2", "5/2"
};

// Path t -> Gamma(t) in Sp(2m) for the structure J (J^2 = -I, Gamma^T J Gamma = J).
// Besides the stored samples every path can be evaluated anywhere in [0,1] and
// reports its generator S(t) = -J Gamma'(t) Gamma(t)^{-1}, which is what the
// crossing forms are built from.
class SymplecticPath {
public:
    using MatFn = std::function<Mat(double)>;

    SymplecticPath(Mat structure, std::vector<double> t, std::vector<Mat> samples, MatFn eval,
                   MatFn tangent, MatFn generator);

    int dim() const { return static_cast<int>(J_.rows()); }
    const Mat& structure() const { return J_; }
    const std::vector<double>& times() const { return t_; }
    const std::vector<Mat>& samples() const { return samples_; }

    Mat at(double t) const { return eval_(t); }
    // S(t) of the path as represented (piecewise constant for integrated/interpolated paths).
    Mat tangent_form(double t) const { return tangent_(t); }
    bool has_generator() const { return static_cast<bool>(generator_); }
    // The caller-supplied coefficient path, if any.
    Mat generator(double t) const;

    // Invariant checks; throws InvariantError naming the violated condition.
    void validate(double tol) const;

private:
    Mat J_;
    std::vector<double> t_;
    std::vector<Mat> samples_;
    MatFn eval_, tangent_, generator_;
};

using MatFn = SymplecticPath::MatFn;

// Closed-form path; tangent is the exact generator.
SymplecticPath closed_form_path(const Mat& J, MatFn eval, MatFn generator, int nsamples);

// Integrates Gamma' = J S(t) Gamma, Gamma(0) = I by exponential midpoint steps,
// which keeps every sample exactly symplectic up to rounding.
SymplecticPath integrate_generator(const Mat& J, MatFn S, int steps);

// Sampled path; between samples Gamma(t) = exp(theta L_i) Gamma_i with
// L_i = log(Gamma_{i+1} Gamma_i^{-1}). No generator attached.
SymplecticPath interpolated_path(const Mat& J, std::vector<double> t, std::vector<Mat> samples);

SymplecticPath identity_path(int m);
SymplecticPath rotation_path(double turns);  // t -> exp(2 pi turns t J_1)

// Split structure diag(J_1, -J_1) on R^4 used by the unipotent path below.
Mat theta_structure();
SymplecticPath theta_path(double tau, double hp, double hpp, int nsamples = 65);

SymplecticPath perturbed_path(const SymplecticPath& p, double delta, int steps = 400);
SymplecticPath block_diag(const SymplecticPath& a, const SymplecticPath& b);
// Psi Gamma Psi^{-1} for Psi symplectic for the path structure.
SymplecticPath conjugate(const SymplecticPath& p, const Mat& psi);

struct Crossing {
    double t = 0;
    Mat kernel_basis;  // columns, orthonormal, complementary to the persistent kernel
    SymmetricForm form;
    int sig = 0;
    bool endpoint = false;
};

struct IndexOptions {
    double tol = 1e-9;         // signature threshold (relative to form scale)
    double kernel_tol = 1e-7;  // singular-value threshold for kernels
    double time_tol = 1e-10;   // refinement tolerance
    int scan_points = 512;     // minimum number of scan points
};

struct IndexResult {
    HalfInteger value;
    std::vector<Crossing> crossings;
    int persistent_dim = 0;
};

IndexResult rs_index_detail(const SymplecticPath& p, const IndexOptions& opt = {});
IndexResult rs_index_detail(const SymplecticPath& p, double a, double b, const IndexOptions& opt = {});
HalfInteger rs_index(const SymplecticPath& p, double tol = 1e-9);
// Index of the restriction to [a, b] (not renormalized).
HalfInteger rs_index(const SymplecticPath& p, double a, double b, double tol = 1e-9);

// CSV with header "t,m00,m01,...": one row per sample, row-major entries.
std::string path_to_csv(const SymplecticPath& p);
SymplecticPath path_from_csv(const std::string& text, const Mat& structure);
SymplecticPath path_from_csv(const std::string& text);  // standard structure

}
