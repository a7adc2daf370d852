#include "rfhlab/z2complex.hpp"
#include "rfhlab/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace rfh {

BitMatrix::BitMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(rows, std::vector<uint64_t>((cols + 63) / 64, 0)) {}

BitMatrix BitMatrix::identity(int n)
{
    BitMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

void BitMatrix::set(int i, int j, bool v)
{
    uint64_t bit = uint64_t{1} << (j & 63);
    if (v) data_[i][j >> 6] |= bit;
    else data_[i][j >> 6] &= ~bit;
}

void BitMatrix::add_row(int dst, const std::vector<uint64_t>& src)
{
    for (size_t w = 0; w < src.size(); ++w) data_[dst][w] ^= src[w];
}

bool BitMatrix::row_zero(int i) const
{
    for (uint64_t w : data_[i])
        if (w) return false;
    return true;
}

BitMatrix BitMatrix::operator*(const BitMatrix& o) const
{
    if (cols_ != o.rows_) throw ConfigError("BitMatrix: dimension mismatch in product");
    BitMatrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k)
            if (get(i, k)) r.add_row(i, o.data_[k]);
    return r;
}

BitMatrix BitMatrix::operator+(const BitMatrix& o) const
{
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ConfigError("BitMatrix: dimension mismatch in sum");
    BitMatrix r = *this;
    for (int i = 0; i < rows_; ++i) r.add_row(i, o.data_[i]);
    return r;
}

BitMatrix BitMatrix::transpose() const
{
    BitMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            if (get(i, j)) t.set(j, i, true);
    return t;
}

BitMatrix BitMatrix::submatrix(const std::vector<int>& rs, const std::vector<int>& cs) const
{
    BitMatrix s(static_cast<int>(rs.size()), static_cast<int>(cs.size()));
    for (size_t i = 0; i < rs.size(); ++i)
        for (size_t j = 0; j < cs.size(); ++j)
            if (get(rs[i], cs[j])) s.set(static_cast<int>(i), static_cast<int>(j), true);
    return s;
}

int BitMatrix::rank() const
{
    BitMatrix a = *this;
    int r = 0;
    for (int c = 0; c < cols_ && r < rows_; ++c) {
        int piv = -1;
        for (int i = r; i < rows_; ++i)
            if (a.get(i, c)) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(a.data_[piv], a.data_[r]);
        for (int i = 0; i < rows_; ++i)
            if (i != r && a.get(i, c)) a.add_row(i, a.data_[r]);
        ++r;
    }
    return r;
}

bool BitMatrix::is_zero() const
{
    for (int i = 0; i < rows_; ++i)
        if (!row_zero(i)) return false;
    return true;
}

// ---------------------------------------------------------------------------

static std::map<std::string, int> index_map(const std::vector<Z2Generator>& gens)
{
    std::map<std::string, int> idx;
    for (size_t i = 0; i < gens.size(); ++i)
        if (!idx.emplace(gens[i].id, static_cast<int>(i)).second)
            throw ConfigError("duplicate generator id " + gens[i].id);
    return idx;
}

static bool all_graded(const std::vector<Z2Generator>& gens)
{
    if (gens.empty()) return false;
    bool any = false, all = true;
    for (const auto& g : gens) {
        any |= g.degree.has_value();
        all &= g.degree.has_value();
    }
    if (any && !all) throw ConfigError("either all generators carry a degree or none does");
    return all;
}

FilteredZ2Complex::FilteredZ2Complex(std::vector<Z2Generator> gens, BitMatrix counts)
    : gens_(std::move(gens)), b_(std::move(counts))
{
    const int n = static_cast<int>(gens_.size());
    if (b_.rows() != n || b_.cols() != n) throw ConfigError("complex: count matrix size mismatch");
    idx_ = index_map(gens_);
    graded_ = all_graded(gens_);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!b_.get(i, j)) continue;
            if (gens_[j].action > gens_[i].action)
                throw InvariantError("filtration violated: boundary count " + gens_[i].id + " -> " + gens_[j].id +
                                     " raises the action");
            if (graded_ && *gens_[j].degree != *gens_[i].degree - 1)
                throw InvariantError("grading violated: boundary count " + gens_[i].id + " -> " + gens_[j].id +
                                     " does not drop the degree by one");
        }
}

int FilteredZ2Complex::index_of(const std::string& id) const
{
    auto it = idx_.find(id);
    if (it == idx_.end()) throw ConfigError("unknown generator " + id);
    return it->second;
}

const BitMatrix& boundary(const FilteredZ2Complex& c) { return c.counts(); }

static Witness first_nonzero(const BitMatrix& m, const std::vector<Z2Generator>& g)
{
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (m.get(i, j)) return {false, g[i].id, g[j].id};
    return {};
}

Witness verify_d_squared(const FilteredZ2Complex& c)
{
    return first_nonzero(c.counts() * c.counts(), c.generators());
}

HomologyRanks homology(const FilteredZ2Complex& c)
{
    if (!verify_d_squared(c).ok) throw InvariantError("homology: boundary does not square to zero");
    HomologyRanks h;
    const auto& g = c.generators();
    const int n = static_cast<int>(g.size());
    if (!c.graded()) {
        h.total = n - 2 * c.counts().rank();
        return h;
    }
    h.graded = true;
    std::map<int, std::vector<int>> byd;
    for (int i = 0; i < n; ++i) byd[*g[i].degree].push_back(i);
    auto rank_from = [&](int d) {
        auto a = byd.find(d), b = byd.find(d - 1);
        if (a == byd.end() || b == byd.end()) return 0;
        return c.counts().submatrix(a->second, b->second).rank();
    };
    for (const auto& [d, ids] : byd) {
        int betti = static_cast<int>(ids.size()) - rank_from(d) - rank_from(d + 1);
        h.by_degree[d] = betti;
        h.total += betti;
    }
    return h;
}

ChainMapMatrix::ChainMapMatrix(std::vector<Z2Generator> gens, BitMatrix counts)
    : gens_(std::move(gens)), m_(std::move(counts))
{
    const int n = static_cast<int>(gens_.size());
    if (m_.rows() != n || m_.cols() != n) throw ConfigError("chain map: count matrix size mismatch");
    index_map(gens_);
    bool graded = all_graded(gens_);
    for (int i = 0; i < n; ++i) {
        if (!m_.get(i, i))
            throw InvariantError("chain map not invertible: zero diagonal entry at " + gens_[i].id);
        for (int j = 0; j < n; ++j) {
            if (i == j || !m_.get(i, j)) continue;
            if (gens_[i].action <= gens_[j].action)
                throw InvariantError("chain map filtration violated: " + gens_[i].id + " -> " + gens_[j].id);
            if (graded && *gens_[i].degree != *gens_[j].degree)
                throw InvariantError("chain map does not preserve degree: " + gens_[i].id + " -> " + gens_[j].id);
        }
    }
}

std::vector<uint8_t> phi_apply(const ChainMapMatrix& m, const std::vector<uint8_t>& eps)
{
    const int n = static_cast<int>(m.generators().size());
    if (static_cast<int>(eps.size()) != n) throw ConfigError("phi_apply: vector length mismatch");
    std::vector<uint8_t> out(n, 0);
    for (int xm = 0; xm < n; ++xm)
        if (eps[xm] & 1)
            for (int xp = 0; xp < n; ++xp)
                if (m.counts().get(xm, xp)) out[xp] ^= 1;
    return out;
}

ChainMapMatrix phi_invert(const ChainMapMatrix& m)
{
    const auto& g = m.generators();
    const int n = static_cast<int>(g.size());
    // Process x+ in decreasing action so every m(x-, x) on the right is known.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g[a].action > g[b].action; });
    BitMatrix inv(n, n);
    for (int xm = 0; xm < n; ++xm) {
        for (int xp : order) {
            if (xp == xm) {
                inv.set(xm, xp, true);
                continue;
            }
            if (g[xp].action >= g[xm].action) continue;
            bool v = false;
            for (int x = 0; x < n; ++x)
                if (x != xp && m.counts().get(x, xp) && inv.get(xm, x)) v = !v;
            inv.set(xm, xp, v);
        }
    }
    return ChainMapMatrix(g, inv);
}

Witness verify_chain_map(const ChainMapMatrix& m, const FilteredZ2Complex& source, const FilteredZ2Complex& target)
{
    // Row-vector convention: Phi o d_S = d_T o Phi  <=>  B_S N = N B_T.
    const auto& g = m.generators();
    if (g.size() != source.generators().size() || g.size() != target.generators().size())
        throw ConfigError("verify_chain_map: generator count mismatch");
    return first_nonzero(source.counts() * m.counts() + m.counts() * target.counts(), g);
}

FilteredZ2Complex conjugate_complex(const ChainMapMatrix& m, const FilteredZ2Complex& source)
{
    BitMatrix inv = phi_invert(m).counts();
    return FilteredZ2Complex(source.generators(), inv * source.counts() * m.counts());
}

// ---------------------------------------------------------------------------

static BitMatrix pairs_to_matrix(const std::vector<Z2Generator>& gens,
                                 const std::vector<std::pair<std::string, std::string>>& pairs)
{
    auto idx = index_map(gens);
    BitMatrix b(static_cast<int>(gens.size()), static_cast<int>(gens.size()));
    for (const auto& [f, t] : pairs) {
        auto a = idx.find(f), c = idx.find(t);
        if (a == idx.end() || c == idx.end()) throw ConfigError("instance refers to unknown generator " + f + "/" + t);
        b.flip(a->second, c->second);
    }
    return b;
}

FilteredZ2Complex Z2Instance::source() const { return FilteredZ2Complex(gens, pairs_to_matrix(gens, bnd)); }

std::optional<FilteredZ2Complex> Z2Instance::target() const
{
    if (tbnd.empty()) return std::nullopt;
    return FilteredZ2Complex(gens, pairs_to_matrix(gens, tbnd));
}

std::optional<ChainMapMatrix> Z2Instance::chain_map() const
{
    if (phi.empty()) return std::nullopt;
    BitMatrix m = pairs_to_matrix(gens, phi);
    return ChainMapMatrix(gens, m);
}

Z2Instance parse_instance(const std::string& text)
{
    Z2Instance inst;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        auto fail = [&](const std::string& why) {
            throw ConfigError("instance line " + std::to_string(lineno) + ": " + why);
        };
        if (kw == "gen") {
            Z2Generator g;
            std::string dkw, dval, akw;
            if (!(ls >> g.id >> dkw >> dval >> akw >> g.action) || dkw != "degree" || akw != "action")
                fail("expected 'gen <id> degree <k> action <a>'");
            if (dval != "none") {
                try {
                    g.degree = std::stoi(dval);
                } catch (const std::exception&) {
                    fail("bad degree '" + dval + "'");
                }
            }
            inst.gens.push_back(g);
        } else if (kw == "bnd" || kw == "tbnd" || kw == "phi") {
            std::string f, t;
            if (!(ls >> f >> t)) fail("expected '" + kw + " <from> <to>'");
            (kw == "bnd" ? inst.bnd : kw == "tbnd" ? inst.tbnd : inst.phi).emplace_back(f, t);
        } else {
            fail("unknown keyword '" + kw + "'");
        }
    }
    return inst;
}

std::string export_instance(const Z2Instance& inst)
{
    std::vector<int> order(inst.gens.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (inst.gens[a].action != inst.gens[b].action) return inst.gens[a].action > inst.gens[b].action;
        return inst.gens[a].id < inst.gens[b].id;
    });
    std::map<std::string, int> rank;
    for (size_t i = 0; i < order.size(); ++i) rank[inst.gens[order[i]].id] = static_cast<int>(i);
    std::ostringstream os;
    for (int i : order) {
        const auto& g = inst.gens[i];
        char a[40];
        std::snprintf(a, sizeof a, "%.17g", g.action);
        os << "gen " << g.id << " degree " << (g.degree ? std::to_string(*g.degree) : "none") << " action " << a
           << "\n";
    }
    auto emit = [&](const char* kw, std::vector<std::pair<std::string, std::string>> v) {
        std::sort(v.begin(), v.end(), [&](const auto& x, const auto& y) {
            return std::pair(rank.at(x.first), rank.at(x.second)) < std::pair(rank.at(y.first), rank.at(y.second));
        });
        for (const auto& [f, t] : v) os << kw << " " << f << " " << t << "\n";
    };
    emit("bnd", inst.bnd);
    emit("tbnd", inst.tbnd);
    emit("phi", inst.phi);
    return os.str();
}

static std::vector<std::pair<std::string, std::string>> matrix_pairs(const BitMatrix& m,
                                                                     const std::vector<Z2Generator>& g)
{
    std::vector<std::pair<std::string, std::string>> v;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (m.get(i, j)) v.emplace_back(g[i].id, g[j].id);
    return v;
}

Z2Instance instance_from(const FilteredZ2Complex& c, const ChainMapMatrix* m, const FilteredZ2Complex* target)
{
    Z2Instance inst;
    inst.gens = c.generators();
    inst.bnd = matrix_pairs(c.counts(), inst.gens);
    if (m) inst.phi = matrix_pairs(m->counts(), inst.gens);
    if (target) inst.tbnd = matrix_pairs(target->counts(), inst.gens);
    return inst;
}

// ---------------------------------------------------------------------------

std::vector<Z2Generator> random_generators(std::mt19937_64& rng, int n, bool graded)
{
    std::uniform_int_distribution<int> deg(0, 4);
    std::vector<double> acts(n);
    for (int i = 0; i < n; ++i) acts[i] = i + 0.25 * (rng() % 4);  // distinct
    std::shuffle(acts.begin(), acts.end(), rng);
    std::vector<Z2Generator> g(n);
    for (int i = 0; i < n; ++i) {
        g[i].id = "g" + std::to_string(i);
        g[i].action = acts[i];
        if (graded) g[i].degree = deg(rng);
    }
    return g;
}

static bool triangular_ok(const std::vector<Z2Generator>& g, int i, int j)
{
    return g[i].action > g[j].action && (!g[i].degree || *g[i].degree == *g[j].degree);
}

ChainMapMatrix random_chain_iso(std::mt19937_64& rng, const std::vector<Z2Generator>& gens, double density)
{
    const int n = static_cast<int>(gens.size());
    std::bernoulli_distribution coin(density);
    BitMatrix m = BitMatrix::identity(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && triangular_ok(gens, i, j) && coin(rng)) m.set(i, j, true);
    return ChainMapMatrix(gens, m);
}

FilteredZ2Complex random_toy_complex(std::mt19937_64& rng, const std::vector<Z2Generator>& gens)
{
    const int n = static_cast<int>(gens.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> used(n, false);
    BitMatrix d(n, n);
    std::bernoulli_distribution coin(0.7);
    // Disjoint cancelling pairs x- -> x+ with lower action and degree one less.
    for (int a : order) {
        if (used[a] || !coin(rng)) continue;
        for (int b : order) {
            if (used[b] || b == a || gens[b].action >= gens[a].action) continue;
            if (gens[a].degree && *gens[b].degree != *gens[a].degree - 1) continue;
            d.set(a, b, true);
            used[a] = used[b] = true;
            break;
        }
    }
    ChainMapMatrix t = random_chain_iso(rng, gens, 0.25);
    BitMatrix tinv = phi_invert(t).counts();
    return FilteredZ2Complex(gens, tinv * d * t.counts());
}

}
