#include "doctest.h"
#include "rfhlab/errors.hpp"
#include "rfhlab/z2complex.hpp"

using namespace rfh;

namespace {
// Independent brute-force product over Z2 from plain integer arrays.
std::vector<std::vector<int>> dense(const BitMatrix& m)
{
    std::vector<std::vector<int>> a(m.rows(), std::vector<int>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) a[i][j] = m.get(i, j);
    return a;
}
std::vector<std::vector<int>> mul(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b)
{
    size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    std::vector<std::vector<int>> c(n, std::vector<int>(m));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j) {
            int s = 0;
            for (size_t l = 0; l < k; ++l) s += a[i][l] * b[l][j];
            c[i][j] = s % 2;
        }
    return c;
}
bool is_identity(const std::vector<std::vector<int>>& a)
{
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a.size(); ++j)
            if (a[i][j] != (i == j)) return false;
    return true;
}

// x3 (deg 2, action 4) -> x2a, x2b (deg 1) -> x1 (deg 0): a square with d^2 = 0.
const char* kSquare = R"(gen x3 degree 2 action 4
gen x2a degree 1 action 3
gen x2b degree 1 action 2.5
gen x1 degree 0 action 1
bnd x3 x2a
bnd x3 x2b
bnd x2a x1
bnd x2b x1
)";
}

TEST_CASE("bit matrix rank and product")
{
    BitMatrix a(3, 3);
    a.set(0, 1, true);
    a.set(1, 2, true);
    CHECK(a.rank() == 2);
    CHECK((a * a).get(0, 2));
    CHECK((a * a * a).is_zero());
    BitMatrix big(70, 70);
    for (int i = 0; i < 70; ++i) big.set(i, (i * 7) % 70, true);
    CHECK(big.rank() == 10);
}

TEST_CASE("boundary examples and homology")
{
    std::vector<Z2Generator> g{{"a", 1, 2.0}, {"b", 0, 1.0}};
    FilteredZ2Complex zero(g, BitMatrix(2, 2));
    CHECK(boundary(zero).is_zero());
    auto h0 = homology(zero);
    CHECK(h0.by_degree[1] == 1);
    CHECK(h0.by_degree[0] == 1);
    BitMatrix m(2, 2);
    m.set(0, 1, true);
    FilteredZ2Complex one(g, m);
    CHECK(boundary(one).rank() == 1);
    CHECK(verify_d_squared(one).ok);
    auto h1 = homology(one);
    CHECK(h1.by_degree[1] == 0);
    CHECK(h1.by_degree[0] == 0);

    auto sq = parse_instance(kSquare).source();
    auto d = dense(boundary(sq));
    auto d2 = mul(d, d);
    for (auto& r : d2)
        for (int v : r) CHECK(v == 0);
    CHECK(verify_d_squared(sq).ok);
    // hand elimination: both boundary blocks have rank 1, so every Betti number vanishes
    auto h = homology(sq);
    CHECK(h.by_degree[2] == 0);
    CHECK(h.by_degree[1] == 0);
    CHECK(h.by_degree[0] == 0);
}

TEST_CASE("filtration and grading are enforced")
{
    std::vector<Z2Generator> g{{"a", 1, 1.0}, {"b", 0, 2.0}};
    BitMatrix m(2, 2);
    m.set(0, 1, true);
    CHECK_THROWS_AS(FilteredZ2Complex(g, m), InvariantError);
    std::vector<Z2Generator> g2{{"a", 2, 2.0}, {"b", 0, 1.0}};
    CHECK_THROWS_AS(FilteredZ2Complex(g2, m), InvariantError);
}

TEST_CASE("corrupted instance gives the flipped pair as witness")
{
    auto inst = parse_instance(kSquare);
    inst.bnd.pop_back();  // drop x2b -> x1
    auto c = inst.source();
    auto w = verify_d_squared(c);
    CHECK_FALSE(w.ok);
    CHECK(w.from == "x3");
    CHECK(w.to == "x1");
    CHECK_THROWS_AS(homology(c), InvariantError);
}

TEST_CASE("phi inverse examples")
{
    std::mt19937_64 rng(17);
    auto g = random_generators(rng, 8, false);
    ChainMapMatrix id(g, BitMatrix::identity(8));
    CHECK(phi_invert(id).counts() == BitMatrix::identity(8));
    // M = I + N with N^2 = 0: inverse is M itself
    std::vector<int> ord(8);
    for (int i = 0; i < 8; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return g[a].action > g[b].action; });
    BitMatrix n(8, 8);
    n.set(ord[0], ord[5], true);
    n.set(ord[1], ord[6], true);
    n.set(ord[2], ord[7], true);
    CHECK((n * n).is_zero());
    ChainMapMatrix m(g, BitMatrix::identity(8) + n);
    CHECK(phi_invert(m).counts() == m.counts());
    for (int trial = 0; trial < 20; ++trial) {
        auto r = random_chain_iso(rng, g, 0.5);
        auto inv = phi_invert(r);
        CHECK(is_identity(mul(dense(r.counts()), dense(inv.counts()))));
        CHECK(is_identity(mul(dense(inv.counts()), dense(r.counts()))));
        CHECK(phi_invert(inv).counts() == r.counts());
        std::vector<uint8_t> e(8);
        for (int i = 0; i < 8; ++i) e[i] = (rng() >> 7) & 1;
        CHECK(phi_apply(inv, phi_apply(r, e)) == e);
    }
    BitMatrix z = BitMatrix::identity(8);
    z.set(3, 3, false);
    CHECK_THROWS_AS(ChainMapMatrix(g, z), InvariantError);
}

TEST_CASE("chain maps: identity, conjugation, corruption")
{
    auto sq = parse_instance(kSquare).source();
    ChainMapMatrix id(sq.generators(), BitMatrix::identity(4));
    CHECK(verify_chain_map(id, sq, sq).ok);
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        auto g = random_generators(rng, 12 + trial, true);
        auto c = random_toy_complex(rng, g);
        CHECK(verify_d_squared(c).ok);
        auto phi = random_chain_iso(rng, g, 0.4);
        auto t = conjugate_complex(phi, c);
        CHECK(verify_d_squared(t).ok);
        CHECK(verify_chain_map(phi, c, t).ok);
        auto hc = homology(c), ht = homology(t);
        CHECK(hc.by_degree == ht.by_degree);
        // corrupt one entry of the target differential
        BitMatrix bad = t.counts();
        bool done = false;
        for (int i = 0; i < bad.rows() && !done; ++i)
            for (int j = 0; j < bad.cols() && !done; ++j)
                if (g[j].action < g[i].action && *g[j].degree == *g[i].degree - 1) {
                    bad.flip(i, j);
                    done = true;
                }
        if (done) {
            auto w = verify_chain_map(phi, c, FilteredZ2Complex(g, bad));
            CHECK_FALSE(w.ok);
        }
    }
}

TEST_CASE("instance export is canonical and round trips")
{
    auto inst = parse_instance(kSquare);
    std::string a = export_instance(inst);
    auto back = parse_instance(a);
    CHECK(export_instance(back) == a);
    std::reverse(inst.bnd.begin(), inst.bnd.end());
    CHECK(export_instance(inst) == a);
    CHECK_THROWS_AS(parse_instance("gen a degree 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_instance("foo a b\n"), ConfigError);
}
