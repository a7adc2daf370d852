#include "rfhlab/grading.hpp"
#include "rfhlab/errors.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>

namespace rfh {

int mu_lambda(const CriticalComponent& c)
{
    HalfInteger v = c.mu_rs - HalfInteger::half(c.dimLambda());
    if (!v.is_integer())
        throw InvariantError("mu(Lambda) of component " + c.id + " is not an integer: " + v.str());
    return v.as_integer();
}

int mu_K(const CriticalComponent& c)
{
    if (c.kind == ComponentKind::constants) return 1 - c.n;
    HalfInteger v = c.mu_rs - HalfInteger::half(c.dimK - 1);
    if (!v.is_integer()) throw InvariantError("mu(K) of component " + c.id + " is not an integer: " + v.str());
    return v.as_integer();
}

GradedGenerator make_generator(const CriticalComponent& c, int ind_f, const std::string& name)
{
    if (ind_f < 0 || ind_f > c.dimK) throw ConfigError("Morse index out of range for component " + c.id);
    GradedGenerator g;
    g.component = c.id;
    g.name = name.empty() ? c.id + ":" + std::to_string(ind_f) : name;
    g.ind_f = ind_f;
    g.mu_f = mu_lambda(c) + ind_f + 1;
    g.mu_f_RF = mu_K(c) + ind_f;
    g.action = c.action;
    if (g.mu_f != g.mu_f_RF)
        throw InvariantError("generator " + g.name + ": mu_f=" + std::to_string(g.mu_f) +
                             " differs from mu_f^RF=" + std::to_string(g.mu_f_RF));
    return g;
}

std::vector<GradedGenerator> sphere_generators(const CriticalComponent& c)
{
    return {make_generator(c, 0, c.id + ":min"), make_generator(c, c.dimK, c.id + ":max")};
}

std::vector<CriticalComponent> model_components(const ModelSystem& sys, int kmax)
{
    std::vector<CriticalComponent> out;
    for (int k = -kmax; k <= kmax; ++k) {
        CriticalComponent c;
        c.n = sys.n;
        c.dimK = 2 * sys.n - 1;
        if (k == 0) {
            c.id = "const";
            c.kind = ComponentKind::constants;
            c.mu_rs = HalfInteger{0};
            c.action = 0;
        } else {
            c.id = "orbit" + std::to_string(k);
            c.kind = ComponentKind::orbit;
            double tau = 2 * std::numbers::pi * k / sys.profile.dh(1.0);
            c.action = reeb_orbits(sys, tau).action;
            c.mu_rs = rs_index(linearized_flow_path(sys, k));
        }
        out.push_back(c);
    }
    return out;
}

static int dim_and_mu(CascadeMode mode, const CriticalComponent& c, int& mu)
{
    if (mode == CascadeMode::rabinowitz) {
        mu = mu_K(c);
        return c.dimK;
    }
    mu = mu_lambda(c);
    return c.dimLambda();
}

int cascade_dims(CascadeMode mode, const Endpoint& minus, const Endpoint& plus)
{
    const bool gm = minus.is_generator(), gp = plus.is_generator();
    if (mode == CascadeMode::hybrid) {
        // Mixed endpoints: cut the component space down by the stable/unstable
        // manifold of the Morse function at the fixed end.
        const int left = gm ? make_generator(minus.comp, *minus.ind_f).mu_f_RF : mu_K(minus.comp) + minus.comp.dimK;
        const int right = gp ? make_generator(plus.comp, *plus.ind_f).mu_f : mu_lambda(plus.comp);
        return left - right;
    }
    auto gen_mu = [mode](const Endpoint& e) {
        auto g = make_generator(e.comp, *e.ind_f);
        return mode == CascadeMode::rabinowitz ? g.mu_f_RF : g.mu_f;
    };
    int mum = 0, mup = 0;
    int dm = dim_and_mu(mode, minus.comp, mum);
    dim_and_mu(mode, plus.comp, mup);
    if (mode == CascadeMode::extended) {
        if (!gm && !gp) return mum + dm - mup - 1;
        if (gm && !gp) return gen_mu(minus) - mup - 1;
        if (!gm && gp) return mum + dm - gen_mu(plus);
        return gen_mu(minus) - gen_mu(plus);
    }
    // rabinowitz
    if (!gm && !gp) return mum + dm - mup - 1;
    if (gm && !gp) return gen_mu(minus) - mup - 1;
    if (!gm && gp) return mum + dm - gen_mu(plus) - 1;
    return gen_mu(minus) - gen_mu(plus) - 1;
}

int fredholm_index_cylinder(int mu_lambda_minus, int mu_lambda_plus, int dim_lambda_plus)
{
    return mu_lambda_minus - mu_lambda_plus - dim_lambda_plus;
}

HybridIndexReport fredholm_index_hybrid(const HybridIndexData& d)
{
    if (!d.sign_lambda || (*d.sign_lambda != 1 && *d.sign_lambda != -1))
        throw ConfigError("fredholm_index(hybrid): sign of the regularity scalar required (+1 or -1)");
    HybridIndexReport r;
    // Boundary correction: m/2 - (dim W0 + 2 dim V0 - 2 dim(W0 cap V0xV0))/2.
    const int m = 2 * d.n + 1, dimW0 = 2 * d.n + 1, dimV0 = d.n, dimCap = d.n;
    r.k = HalfInteger::half(m) - HalfInteger::half(dimW0 + 2 * dimV0 - 2 * dimCap);
    r.ind_Dprime = d.mu_rs_W1 - HalfInteger::half(d.nu_W1) + d.mu_rs_W2 - HalfInteger::half(d.nu_W2) + r.k;
    // sgn c(1) = sgn lambda
    r.ind_Dsecond = *d.sign_lambda > 0 ? 0 : 1;
    r.mu_Lambda = (-(d.mu_rs_W2 + HalfInteger::half(d.nu_W2))).as_integer();
    HalfInteger muK = d.mu_rs_W1 - HalfInteger::half(d.nu_W1);
    if (*d.sign_lambda < 0) muK = muK + HalfInteger::from_int(1);
    r.mu_K = muK.as_integer();
    r.total = r.ind_Dprime.as_integer() + r.ind_Dsecond;
    int expect = r.mu_K - r.mu_Lambda - d.nu_W2;
    if (r.total != expect)
        throw InvariantError("hybrid index assembly " + std::to_string(r.total) + " != mu(K) - mu(Lambda) - dim Lambda = " +
                             std::to_string(expect));
    return r;
}

HybridIndexData hybrid_branch_data(int muK, int muLambda, int dimLambda, int n, int sign)
{
    HybridIndexData d;
    d.n = n;
    d.nu_W1 = 1;
    d.nu_W2 = dimLambda;
    d.sign_lambda = sign;
    HalfInteger w1 = HalfInteger::from_int(muK) + HalfInteger::half(d.nu_W1);
    if (sign < 0) w1 = w1 - HalfInteger::from_int(1);
    d.mu_rs_W1 = w1;
    d.mu_rs_W2 = -HalfInteger::from_int(muLambda) - HalfInteger::half(dimLambda);
    return d;
}

std::string grading_report_csv(const std::vector<CriticalComponent>& comps)
{
    std::ostringstream os;
    os << "component,kind,action,dimK,dimLambda,mu_rs,mu_K,mu_Lambda,generator,ind_f,mu_f,mu_f_RF\n";
    for (const auto& c : comps) {
        char act[40];
        std::snprintf(act, sizeof act, "%.12g", c.action);
        for (const auto& g : sphere_generators(c)) {
            os << c.id << "," << (c.kind == ComponentKind::constants ? "constants" : "orbit") << "," << act << ","
               << c.dimK << "," << c.dimLambda() << "," << c.mu_rs.str() << "," << mu_K(c) << "," << mu_lambda(c)
               << "," << g.name << "," << g.ind_f << "," << g.mu_f << "," << g.mu_f_RF << "\n";
        }
    }
    return os.str();
}

std::vector<CriticalComponent> components_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("component table: ") + e.what());
    }
    const auto& arr = j.is_array() ? j : j.at("components");
    std::vector<CriticalComponent> out;
    for (const auto& e : arr) {
        CriticalComponent c;
        try {
            c.id = e.at("id").get<std::string>();
            std::string kind = e.value("kind", "orbit");
            if (kind != "orbit" && kind != "constants") throw ConfigError("unknown component kind " + kind);
            c.kind = kind == "constants" ? ComponentKind::constants : ComponentKind::orbit;
            c.action = e.value("action", 0.0);
            c.n = e.value("n", 1);
            c.dimK = e.value("dimK", 2 * c.n - 1);
            c.mu_rs = HalfInteger{e.at("mu_rs_twice").get<int>()};
        } catch (const nlohmann::json::exception& ex) {
            throw ConfigError(std::string("component table entry: ") + ex.what());
        }
        out.push_back(c);
    }
    return out;
}

std::string components_to_json(const std::vector<CriticalComponent>& comps)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : comps) {
        nlohmann::ordered_json e;
        e["id"] = c.id;
        e["kind"] = c.kind == ComponentKind::constants ? "constants" : "orbit";
        e["action"] = c.action;
        e["n"] = c.n;
        e["dimK"] = c.dimK;
        e["mu_rs_twice"] = c.mu_rs.twice_value;
        arr.push_back(e);
    }
    nlohmann::ordered_json j;
    j["components"] = arr;
    return j.dump(2);
}

}
