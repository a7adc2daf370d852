#pragma once
#include "rfhlab/model.hpp"
#include "rfhlab/rsindex.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rfh {

enum class ComponentKind { constants, orbit };

struct CriticalComponent {
    std::string id;
    ComponentKind kind = ComponentKind::orbit;
    double action = 0;
    int dimK = 0;
    HalfInteger mu_rs;  // mu_rs(Lambda), equal to the transversal index of K
    int n = 1;

    int dimLambda() const { return dimK + 1; }
};

struct GradedGenerator {
    std::string component;
    std::string name;
    int ind_f = 0;
    int mu_f = 0;
    int mu_f_RF = 0;
    double action = 0;
};

int mu_lambda(const CriticalComponent& c);
int mu_K(const CriticalComponent& c);
GradedGenerator make_generator(const CriticalComponent& c, int ind_f, const std::string& name = "");

// Perfect Morse function on the sphere K: minimum and maximum.
std::vector<GradedGenerator> sphere_generators(const CriticalComponent& c);

// Components of the sphere model with |k| <= kmax; mu_rs from the engine.
std::vector<CriticalComponent> model_components(const ModelSystem& sys, int kmax);

enum class CascadeMode { extended, rabinowitz, hybrid };

// An endpoint is a whole component or one of its critical points of f.
struct Endpoint {
    CriticalComponent comp;
    std::optional<int> ind_f;

    bool is_generator() const { return ind_f.has_value(); }
};

int cascade_dims(CascadeMode mode, const Endpoint& minus, const Endpoint& plus);

// Cylinder operator: mu(Lambda-) - mu(Lambda+) - dim Lambda+.
int fredholm_index_cylinder(int mu_lambda_minus, int mu_lambda_plus, int dim_lambda_plus);

struct HybridIndexData {
    HalfInteger mu_rs_W1;
    int nu_W1 = 1;
    HalfInteger mu_rs_W2;
    int nu_W2 = 0;  // dim Lambda
    int n = 1;
    std::optional<int> sign_lambda;  // sign of the regularity scalar, +1 or -1
};

struct HybridIndexReport {
    HalfInteger k;    // boundary correction
    HalfInteger ind_Dprime;
    int ind_Dsecond = 0;
    int mu_K = 0;
    int mu_Lambda = 0;
    int total = 0;    // ind D
};

HybridIndexReport fredholm_index_hybrid(const HybridIndexData& d);

// W-data realizing given (mu(K), mu(Lambda), dim Lambda) on the branch sign.
HybridIndexData hybrid_branch_data(int muK, int muLambda, int dimLambda, int n, int sign);

// CSV report of components and their generators.
std::string grading_report_csv(const std::vector<CriticalComponent>& comps);
std::vector<CriticalComponent> components_from_json(const std::string& text);
std::string components_to_json(const std::vector<CriticalComponent>& comps);

}
