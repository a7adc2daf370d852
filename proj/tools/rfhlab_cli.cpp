// rfhlab command line: index, grade, flow, hybrid, complex, selftest.
#include "rfhlab/acceptance.hpp"
#include "rfhlab/errors.hpp"
#include "rfhlab/grading.hpp"
#include "rfhlab/gradflow.hpp"
#include "rfhlab/hybrid.hpp"
#include "rfhlab/kernels.hpp"
#include "rfhlab/model.hpp"
#include "rfhlab/rsindex.hpp"
#include "rfhlab/z2complex.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace rfh;
using json = nlohmann::ordered_json;

namespace {

struct Common {
    std::string model = "n=1";
    int nt = 255;
    double tol = 0;  // 0: subcommand default
    long steps = 0;
    uint64_t seed = 1;
    std::string out;
    std::string format;
};

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void emit(const Common& c, const std::string& text)
{
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + c.out);
    f << text;
}

// key=value tokens, e.g. "tau=1 hp=1 hpp=1"
std::map<std::string, double> key_values(const std::vector<std::string>& toks)
{
    std::map<std::string, double> kv;
    for (const auto& t : toks) {
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + t + "'");
        try {
            size_t used = 0;
            const std::string val = t.substr(eq + 1);
            double v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
            kv[t.substr(0, eq)] = v;
        } catch (const std::logic_error&) {
            throw ConfigError("not a number in '" + t + "'");
        }
    }
    return kv;
}

double need(const std::map<std::string, double>& kv, const std::string& k)
{
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError("missing " + k + "=");
    return it->second;
}

// "n=2" shorthand or a model JSON file.
ModelSystem load_model(const std::string& spec)
{
    if (spec.rfind("n=", 0) == 0) {
        auto kv = key_values({spec});
        const double n = kv["n"];
        if (n != std::floor(n)) throw ConfigError("model n must be an integer");
        return make_model(static_cast<int>(n));
    }
    return ModelSystem::from_json(read_file(spec));
}

void check_format(const Common& c, std::initializer_list<const char*> allowed)
{
    if (c.format.empty()) return;
    for (const char* a : allowed)
        if (c.format == a) return;
    throw ConfigError("unsupported --format " + c.format);
}

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

// ---- index

struct IndexArgs {
    std::vector<std::string> theta;
    std::string path;
    int linearized = 0;
    double perturb = 0;
};

int run_index(const Common& c, const IndexArgs& a)
{
    check_format(c, {"csv", "json"});
    const int sources = !a.theta.empty() + !a.path.empty() + (a.linearized != 0);
    if (sources != 1) throw ConfigError("index needs exactly one of --theta, --path, --linearized");
    std::string label;
    SymplecticPath p = [&] {
        if (!a.theta.empty()) {
            auto kv = key_values(a.theta);
            const double tau = need(kv, "tau"), hp = need(kv, "hp"), hpp = need(kv, "hpp");
            label = "theta(tau=" + num(tau) + ";hp=" + num(hp) + ";hpp=" + num(hpp) + ")";
            return theta_path(tau, hp, hpp);
        }
        if (!a.path.empty()) {
            label = a.path;
            return path_from_csv(read_file(a.path));
        }
        auto sys = load_model(c.model);
        label = "linearized(n=" + std::to_string(sys.n) + ";k=" + std::to_string(a.linearized) + ")";
        return linearized_flow_path(sys, a.linearized);
    }();
    if (a.perturb != 0) {
        p = perturbed_path(p, a.perturb);
        label += "+delta(" + num(a.perturb) + ")";
    }
    IndexOptions opt;
    if (c.tol > 0) opt.tol = c.tol;
    IndexResult r = rs_index_detail(p, opt);
    if (c.format == "csv") {
        std::string s = "source,mu_rs,crossings,seed\n" + label + "," + r.value.str() + "," +
                        std::to_string(r.crossings.size()) + "," + std::to_string(c.seed) + "\n";
        emit(c, s);
    } else if (c.format == "json") {
        json j;
        j["source"] = label;
        j["mu_rs"] = r.value.str();
        j["persistent_dim"] = r.persistent_dim;
        json cs = json::array();
        for (const auto& x : r.crossings) cs.push_back({{"t", x.t}, {"signature", x.sig}, {"dim", x.kernel_basis.cols()}, {"endpoint", x.endpoint}});
        j["crossings"] = cs;
        j["seed"] = c.seed;
        emit(c, j.dump(1) + "\n");
    } else {
        emit(c, "mu_rs = " + r.value.str() + "\n");
    }
    return 0;
}

// ---- grade

struct GradeArgs {
    std::vector<std::string> constants;
    std::string components;
    int kmax = 2;
};

int run_grade(const Common& c, const GradeArgs& a)
{
    check_format(c, {"csv", "json"});
    if (!a.constants.empty()) {
        auto kv = key_values(a.constants);
        const double nd = need(kv, "n");
        if (nd < 1 || nd != std::floor(nd)) throw ConfigError("n must be a positive integer");
        CriticalComponent k;
        k.id = "constants";
        k.kind = ComponentKind::constants;
        k.n = static_cast<int>(nd);
        k.dimK = 2 * k.n - 1;
        const int muK = mu_K(k), muL = mu_lambda(k);
        if (c.format == "csv") {
            emit(c, "component,n,dim_K,mu_K,mu_Lambda,seed\nconstants," + std::to_string(k.n) + "," +
                        std::to_string(k.dimK) + "," + std::to_string(muK) + "," + std::to_string(muL) + "," +
                        std::to_string(c.seed) + "\n");
        } else if (c.format == "json") {
            json j{{"component", "constants"}, {"n", k.n},          {"dim_K", k.dimK},
                   {"mu_K", muK},              {"mu_Lambda", muL}, {"seed", c.seed}};
            emit(c, j.dump(1) + "\n");
        } else {
            emit(c, "mu(K) = " + std::to_string(muK) + "\nmu(Lambda) = " + std::to_string(muL) + "\n");
        }
        return 0;
    }
    std::vector<CriticalComponent> comps = a.components.empty()
                                               ? model_components(load_model(c.model), a.kmax)
                                               : components_from_json(read_file(a.components));
    for (const auto& k : comps)
        if (mu_lambda(k) != mu_K(k) - 1) throw InvariantError("mu(Lambda) = mu(K) - 1 fails on " + k.id);
    if (c.format == "json") {
        json j;
        j["seed"] = c.seed;
        json arr = json::array();
        for (const auto& k : comps) {
            json g = json::array();
            for (const auto& x : sphere_generators(k))
                g.push_back({{"name", x.name}, {"ind_f", x.ind_f}, {"mu_f", x.mu_f}, {"mu_f_RF", x.mu_f_RF}});
            arr.push_back({{"id", k.id},
                           {"kind", k.kind == ComponentKind::constants ? "constants" : "orbit"},
                           {"action", k.action},
                           {"dim_K", k.dimK},
                           {"mu_rs", k.mu_rs.str()},
                           {"mu_K", mu_K(k)},
                           {"mu_Lambda", mu_lambda(k)},
                           {"generators", g}});
        }
        j["components"] = arr;
        emit(c, j.dump(1) + "\n");
    } else {
        emit(c, "# seed=" + std::to_string(c.seed) + "\n" + grading_report_csv(comps));
    }
    return 0;
}

// ---- flow

struct FlowArgs {
    std::string system = "extended";
    std::string scheme = "explicit";
    std::string init;
    std::string final_state;
    int k = 1;
    double sigma = 0;
    double eps = 1e-2;
};

void check_flow_invariants(const FlowDiagnostics& d)
{
    for (size_t i = 1; i < d.records.size(); ++i)
        if (d.records[i].action > d.records[i - 1].action + 1e-12)
            throw InvariantError("action non-increasing along the flow (step " + std::to_string(i) + ")");
    if (std::abs(d.energy_residual()) > 1e-6) throw InvariantError("energy identity, residual " + num(d.energy_residual()));
    if (d.max_eta_residual > 1e-6) throw InvariantError("eta average ODE, residual " + num(d.max_eta_residual));
    if (d.max_zeta_drift > 1e-10) throw InvariantError("zeta average conservation, drift " + num(d.max_zeta_drift));
    if (!d.small_grad_ok) throw InvariantError("small gradient implies |H| below threshold");
    if (!d.contained) throw InvariantError("containment in the compact region");
}

int run_flow(const Common& c, const FlowArgs& a)
{
    check_format(c, {"csv", "json"});
    auto sys = load_model(c.model);
    FlowSystem kind;
    if (a.system == "extended")
        kind = FlowSystem::extended;
    else if (a.system == "rabinowitz")
        kind = FlowSystem::rabinowitz;
    else
        throw ConfigError("--system must be extended or rabinowitz");
    int N = c.nt;
    std::string init_text;
    if (!a.init.empty()) {
        init_text = read_file(a.init);
        try {
            N = nlohmann::json::parse(init_text).at("N").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("initial loop: ") + e.what());
        }
    }
    FlowProblem prob(sys, kind, N);
    std::mt19937_64 rng(c.seed);

    Vec center, v0;
    if (init_text.empty()) {
        RabinowitzLoop L = discrete_critical_loop(sys, N, a.k);
        center = kind == FlowSystem::extended ? prob.flatten(lift(L, a.sigma)) : prob.flatten(L);
    } else {
        Vec u = loop_from_json(prob, init_text);
        RabinowitzLoop L = kind == FlowSystem::extended
                               ? RabinowitzLoop{prob.extended(u).x, prob.eta_avg(u)}
                               : prob.rabinowitz(u);
        RabinowitzLoop near = nearest_critical_loop(sys, L);
        center = kind == FlowSystem::extended ? prob.flatten(lift(near, prob.zeta_avg(u))) : prob.flatten(near);
        v0 = u;
    }
    Slice slice = center_stable_slice(prob, center);
    if (init_text.empty())
        v0 = center + stable_perturbation(prob, slice, rng, a.eps);
    else
        v0 = center + slice.project(v0 - center);

    FlowControls ctl;
    if (a.scheme == "semi-implicit")
        ctl.scheme = Scheme::semi_implicit;
    else if (a.scheme != "explicit")
        throw ConfigError("--scheme must be explicit or semi-implicit");
    if (c.tol > 0) ctl.eps_stop = c.tol;
    if (c.steps > 0) ctl.max_steps = c.steps;
    ShootResult sh = shoot(prob, slice, v0, ctl);
    const auto& d = sh.run.diag;
    if (!a.final_state.empty()) {
        std::ofstream f(a.final_state, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + a.final_state);
        f << loop_json(prob, sh.run.state);
    }
    const TargetMatch tm = identify_target(prob, sh.run.state);
    if (c.format == "json") {
        json j;
        j["seed"] = c.seed;
        j["system"] = a.system;
        j["N"] = N;
        j["converged"] = d.converged;
        j["steps"] = d.steps;
        j["shooting_trials"] = sh.trials;
        j["action_start"] = d.action_start;
        j["action_end"] = d.action_end;
        j["energy"] = d.energy;
        j["energy_residual"] = d.energy_residual();
        j["max_eta_residual"] = d.max_eta_residual;
        j["max_zeta_drift"] = d.max_zeta_drift;
        j["small_grad_checked"] = d.small_grad_checked;
        j["small_grad_ok"] = d.small_grad_ok;
        j["contained"] = d.contained;
        j["target_k"] = tm.k;
        j["target_action_gap"] = tm.action_gap;
        emit(c, j.dump(1) + "\n");
    } else {
        emit(c, "# seed=" + std::to_string(c.seed) + " system=" + a.system + " N=" + std::to_string(N) +
                    " target_k=" + std::to_string(tm.k) + "\n" + d.csv());
    }
    if (!d.converged) throw NumericalError("flow did not reach a critical loop within the step budget");
    check_flow_invariants(d);
    return 0;
}

// ---- hybrid

struct HybridArgs {
    std::string init;
    int k = 1;
    double sigma = 0;
    double eps = 0;
    double kappa = 1;
};

HybridState load_hybrid(const ModelSystem& sys, const std::string& text, double& kappa)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.contains("kappa")) kappa = j["kappa"].get<double>();
        const std::string minus = j.at("minus").dump();
        const int N = j.at("minus").at("N").get<int>();
        FlowProblem R(sys, FlowSystem::rabinowitz, N);
        auto z = j.at("zeta").get<std::vector<double>>();
        if (static_cast<int>(z.size()) != N) throw ConfigError("hybrid input: zeta needs N values");
        Vec zeta = Eigen::Map<const Vec>(z.data(), N);
        return coupled_hybrid(sys, R.rabinowitz(loop_from_json(R, minus)), zeta, kappa);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("hybrid input: ") + e.what());
    }
}

int run_hybrid(const Common& c, const HybridArgs& a)
{
    check_format(c, {"csv", "json"});
    auto sys = load_model(c.model);
    double kappa = a.kappa;
    HybridState st;
    if (!a.init.empty()) {
        st = load_hybrid(sys, read_file(a.init), kappa);
    } else if (a.eps == 0) {
        st = stationary_hybrid(sys, c.nt, a.k, a.sigma);
    } else {
        // smooth perturbation of the stationary pair, coupled exactly
        const int N = c.nt, d = 2 * sys.n;
        FlowProblem R(sys, FlowSystem::rabinowitz, N);
        Vec v = R.flatten(discrete_critical_loop(sys, N, a.k));
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int j = 0; j < N; ++j) {
            const double th = 2 * M_PI * j / N;
            for (int i = 0; i < d; ++i) v[j * d + i] += a.eps * (nd(rng) * std::cos(th) + nd(rng) * std::sin(2 * th));
        }
        v[d * N] += a.eps * nd(rng);
        Vec zeta(N);
        for (int j = 0; j < N; ++j) zeta[j] = a.sigma + a.eps * nd(rng) * std::sin(2 * M_PI * j / N);
        st = coupled_hybrid(sys, R.rabinowitz(v), zeta, kappa);
    }
    HybridControls ctl;
    ctl.kappa = kappa;
    if (c.tol > 0) ctl.end_tol = c.tol;
    if (c.steps > 0) ctl.max_sweeps = static_cast<int>(c.steps);
    HybridResult res = hybrid_relax(sys, st, ctl);
    const auto& d = res.diag;
    if (c.format == "json") {
        json j;
        j["seed"] = c.seed;
        j["N"] = static_cast<int>(res.state.minus.empty() ? 0 : (res.state.minus[0].size() - 1) / (2 * sys.n));
        j["converged"] = d.converged;
        j["sweeps"] = d.sweeps.size();
        j["asymptotic_ok"] = d.asymptotic_ok;
        j["end_grad_minus"] = d.end_grad_minus;
        j["end_grad_plus"] = d.end_grad_plus;
        j["max_coupling_residual"] = d.max_coupling_residual;
        j["energy_residual"] = d.energy_residual;
        j["max_abs_eta_minus"] = d.max_abs_eta_minus;
        j["max_abs_eta_plus"] = d.max_abs_eta_plus;
        j["contained"] = d.contained;
        j["k"] = d.k;
        emit(c, j.dump(1) + "\n");
    } else {
        emit(c, "# seed=" + std::to_string(c.seed) + " sweeps=" + std::to_string(d.sweeps.size()) +
                    " k=" + std::to_string(d.k) + "\n" + d.csv());
    }
    if (!d.converged) throw NumericalError("hybrid relaxation did not converge");
    if (d.max_coupling_residual > 1e-10) throw InvariantError("coupling at s = 0, residual " + num(d.max_coupling_residual));
    if (!d.contained) throw InvariantError("containment in the compact region");
    return 0;
}

// ---- complex

struct ComplexArgs {
    std::string instance;
    int random = 0;
    bool graded = true;
};

int run_complex(const Common& c, const ComplexArgs& a)
{
    check_format(c, {"csv", "json"});
    Z2Instance inst;
    if (!a.instance.empty()) {
        inst = parse_instance(read_file(a.instance));
    } else if (a.random > 0) {
        std::mt19937_64 rng(c.seed);
        auto gens = random_generators(rng, a.random, a.graded);
        auto src = random_toy_complex(rng, gens);
        auto phi = random_chain_iso(rng, gens);
        auto tgt = conjugate_complex(phi, src);
        inst = instance_from(src, &phi, &tgt);
    } else {
        throw ConfigError("complex needs --instance or --random");
    }
    FilteredZ2Complex src = inst.source();
    Witness dsq = verify_d_squared(src);
    HomologyRanks h = dsq.ok ? homology(src) : HomologyRanks{};
    auto phi = inst.chain_map();
    std::optional<ChainMapMatrix> inv;
    std::optional<Witness> cm;
    if (phi) {
        inv = phi_invert(*phi);
        auto tgt = inst.target();
        cm = verify_chain_map(*phi, src, tgt ? *tgt : conjugate_complex(*phi, src));
    }
    if (c.format == "json") {
        json j;
        j["seed"] = c.seed;
        j["generators"] = src.generators().size();
        j["graded"] = src.graded();
        j["d_squared_zero"] = dsq.ok;
        j["homology_total"] = h.total;
        json bd = json::object();
        for (auto [deg, r] : h.by_degree) bd[std::to_string(deg)] = r;
        j["homology_by_degree"] = bd;
        if (phi) {
            json m = json::array();
            const auto& gens = inv->generators();
            for (int i = 0; i < inv->counts().rows(); ++i)
                for (int k = 0; k < inv->counts().cols(); ++k)
                    if (i != k && inv->counts().get(i, k)) m.push_back({gens[i].id, gens[k].id});
            j["phi_inverse_offdiagonal"] = m;
            j["chain_map"] = cm->ok;
        }
        emit(c, j.dump(1) + "\n");
    } else {
        std::string s = "quantity,value\nseed," + std::to_string(c.seed) + "\ngenerators," +
                        std::to_string(src.generators().size()) + "\nd_squared_zero," + (dsq.ok ? "1" : "0") +
                        "\nhomology_total," + std::to_string(h.total) + "\n";
        for (auto [deg, r] : h.by_degree) s += "homology_degree_" + std::to_string(deg) + "," + std::to_string(r) + "\n";
        if (phi) {
            int off = 0;
            for (int i = 0; i < inv->counts().rows(); ++i)
                for (int k = 0; k < inv->counts().cols(); ++k) off += i != k && inv->counts().get(i, k);
            s += "phi_inverse_offdiagonal," + std::to_string(off) + "\nchain_map," + (cm->ok ? "1" : "0") + "\n";
        }
        emit(c, s);
    }
    if (!dsq.ok) throw InvariantError("d^2 = 0 fails at (" + dsq.from + ", " + dsq.to + ")");
    if (cm && !cm->ok) throw InvariantError("chain map identity fails at (" + cm->from + ", " + cm->to + ")");
    return 0;
}

// ---- selftest

int run_selftest(const Common& c, const std::vector<int>& only)
{
    SuiteOptions opt;
    opt.seed = c.seed;
    opt.only.insert(only.begin(), only.end());
    auto res = run_acceptance(opt);
    for (const auto& r : res.criteria) std::cout << format_line(r) << "\n";
    if (!c.out.empty()) write_artifacts(res, c.out);
    if (!res.all_pass()) {
        std::string failed;
        for (const auto& r : res.criteria)
            if (!r.pass) failed += " " + std::to_string(r.id);
        throw InvariantError("acceptance criteria failed:" + failed);
    }
    std::cout << "selftest: all criteria passed (seed " << c.seed << ")\n";
    return 0;
}

int exit_code(const Error& e)
{
    switch (e.kind()) {
    case ErrorKind::config: return 2;
    case ErrorKind::numerical: return 3;
    case ErrorKind::invariant: return 4;
    }
    return 1;
}

}

int main(int argc, char** argv)
{
    CLI::App app{"rfhlab: Rabinowitz Floer index and flow toolkit"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--model", c.model, "model: n=<1..3> or a model JSON file")->capture_default_str();
    app.add_option("--nt", c.nt, "loop grid size (odd recommended)")->capture_default_str();
    app.add_option("--tol", c.tol, "tolerance override (must be positive)");
    app.add_option("--steps", c.steps, "step or sweep budget");
    app.add_option("--seed", c.seed, "random seed, recorded in outputs")->capture_default_str();
    app.add_option("--out", c.out, "output file (selftest: artifact directory)");
    app.add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.fallthrough();

    IndexArgs ia;
    auto* idx = app.add_subcommand("index", "Robbin-Salamon index of a symplectic path");
    idx->add_option("--theta", ia.theta, "theta path: tau=.. hp=.. hpp=..")->expected(3);
    idx->add_option("--path", ia.path, "path CSV (t,m00,m01,...)");
    idx->add_option("--linearized", ia.linearized, "linearized flow of the model orbit k");
    idx->add_option("--perturb", ia.perturb, "apply the perturbation exp(-delta J t) at the end");

    GradeArgs ga;
    auto* grade = app.add_subcommand("grade", "grading of critical components");
    grade->add_option("--constants", ga.constants, "constants component: n=..");
    grade->add_option("--components", ga.components, "component table JSON");
    grade->add_option("--kmax", ga.kmax, "orbit multiplicity bound for model components")->capture_default_str();

    FlowArgs fa;
    auto* flow = app.add_subcommand("flow", "negative gradient flow from a perturbed critical loop");
    flow->add_option("--system", fa.system, "extended or rabinowitz")->capture_default_str();
    flow->add_option("--scheme", fa.scheme, "explicit or semi-implicit")->capture_default_str();
    flow->add_option("--init", fa.init, "initial loop JSON");
    flow->add_option("--final", fa.final_state, "write the final loop JSON here");
    flow->add_option("--k", fa.k, "component of the reference loop")->capture_default_str();
    flow->add_option("--sigma", fa.sigma, "sigma of the reference loop")->capture_default_str();
    flow->add_option("--eps", fa.eps, "perturbation amplitude")->capture_default_str();

    HybridArgs ha;
    auto* hyb = app.add_subcommand("hybrid", "relax a coupled hybrid pair");
    hyb->add_option("--init", ha.init, "JSON {minus: loop, zeta: [...], kappa}");
    hyb->add_option("--k", ha.k, "component")->capture_default_str();
    hyb->add_option("--sigma", ha.sigma, "sigma")->capture_default_str();
    hyb->add_option("--eps", ha.eps, "perturbation amplitude (0: stationary pair)")->capture_default_str();
    hyb->add_option("--kappa", ha.kappa, "coupling constant")->capture_default_str();

    ComplexArgs ca;
    auto* cplx = app.add_subcommand("complex", "Z2 chain complex reports");
    cplx->add_option("--instance", ca.instance, "instance file");
    cplx->add_option("--random", ca.random, "random instance with this many generators");
    cplx->add_flag("!--ungraded", ca.graded, "random instance without degrees");

    std::vector<int> only;
    auto* self = app.add_subcommand("selftest", "run the acceptance suite");
    self->add_option("--only", only, "criterion ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        thread_cap_from_env();
        if (c.tol < 0) throw ConfigError("--tol must be positive");
        if (c.steps < 0) throw ConfigError("--steps must be positive");
        if (*idx) return run_index(c, ia);
        if (*grade) return run_grade(c, ga);
        if (*flow) return run_flow(c, fa);
        if (*hyb) return run_hybrid(c, ha);
        if (*cplx) return run_complex(c, ca);
        if (*self) return run_selftest(c, only);
    } catch (const Error& e) {
        std::cerr << "rfhlab: " << e.what() << "\n";
        return exit_code(e);
    }
    return 0;
}
