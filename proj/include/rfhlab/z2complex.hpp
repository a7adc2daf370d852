#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace rfh {

// Dense GF(2) matrix, one bitset per row.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(int rows, int cols);
    static BitMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool get(int i, int j) const { return (data_[i][j >> 6] >> (j & 63)) & 1u; }
    void set(int i, int j, bool v);
    void flip(int i, int j) { data_[i][j >> 6] ^= (uint64_t{1} << (j & 63)); }
    void add_row(int dst, const std::vector<uint64_t>& src);
    const std::vector<uint64_t>& row(int i) const { return data_[i]; }
    bool row_zero(int i) const;

    BitMatrix operator*(const BitMatrix& o) const;
    BitMatrix operator+(const BitMatrix& o) const;
    bool operator==(const BitMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }
    BitMatrix transpose() const;
    BitMatrix submatrix(const std::vector<int>& rs, const std::vector<int>& cs) const;
    int rank() const;
    bool is_zero() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<std::vector<uint64_t>> data_;
};

struct Z2Generator {
    std::string id;
    std::optional<int> degree;
    double action = 0;
};

struct Witness {
    bool ok = true;
    std::string from, to;
};

// Generators plus n(x-, x+) counts, stored as a matrix with row = x-, column = x+.
class FilteredZ2Complex {
public:
    FilteredZ2Complex() = default;
    // Validates filtration and (when graded) the degree drop.
    FilteredZ2Complex(std::vector<Z2Generator> gens, BitMatrix counts);

    const std::vector<Z2Generator>& generators() const { return gens_; }
    const BitMatrix& counts() const { return b_; }
    int index_of(const std::string& id) const;
    bool graded() const { return graded_; }

private:
    std::vector<Z2Generator> gens_;
    BitMatrix b_;
    bool graded_ = false;
    std::map<std::string, int> idx_;
};

// (d eps)(x+) = sum over x- of n(x-, x+) eps(x-): the matrix acting on row vectors.
const BitMatrix& boundary(const FilteredZ2Complex& c);
Witness verify_d_squared(const FilteredZ2Complex& c);

struct HomologyRanks {
    bool graded = false;
    std::map<int, int> by_degree;  // empty when ungraded
    int total = 0;
};
HomologyRanks homology(const FilteredZ2Complex& c);

// Unit-diagonal, action-triangular chain map counts n_Phi(x-, x+) over a generator list.
class ChainMapMatrix {
public:
    ChainMapMatrix() = default;
    ChainMapMatrix(std::vector<Z2Generator> gens, BitMatrix counts);
    const std::vector<Z2Generator>& generators() const { return gens_; }
    const BitMatrix& counts() const { return m_; }

private:
    std::vector<Z2Generator> gens_;
    BitMatrix m_;
};

std::vector<uint8_t> phi_apply(const ChainMapMatrix& m, const std::vector<uint8_t>& eps);
// m-coefficients by recursion in decreasing action of x+:
// m(x-,x+) = sum_{x != x+} n_Phi(x, x+) m(x-, x) for x- != x+.
ChainMapMatrix phi_invert(const ChainMapMatrix& m);
Witness verify_chain_map(const ChainMapMatrix& m, const FilteredZ2Complex& source, const FilteredZ2Complex& target);
// Target differential making m a chain map: Phi^{-1}-conjugate of the source counts.
FilteredZ2Complex conjugate_complex(const ChainMapMatrix& m, const FilteredZ2Complex& source);

// Line-oriented instance files.
struct Z2Instance {
    std::vector<Z2Generator> gens;
    std::vector<std::pair<std::string, std::string>> bnd, tbnd, phi;

    FilteredZ2Complex source() const;
    std::optional<FilteredZ2Complex> target() const;
    std::optional<ChainMapMatrix> chain_map() const;
};
Z2Instance parse_instance(const std::string& text);
std::string export_instance(const Z2Instance& inst);
Z2Instance instance_from(const FilteredZ2Complex& c, const ChainMapMatrix* m = nullptr,
                         const FilteredZ2Complex* target = nullptr);

// Random instances. Generators get distinct actions; degrees present if graded.
std::vector<Z2Generator> random_generators(std::mt19937_64& rng, int n, bool graded);
// Square-zero differential: disjoint cancelling pairs conjugated by a random triangular change of basis.
FilteredZ2Complex random_toy_complex(std::mt19937_64& rng, const std::vector<Z2Generator>& gens);
// Random unit-diagonal triangular matrix; degree preserving if gens are graded.
ChainMapMatrix random_chain_iso(std::mt19937_64& rng, const std::vector<Z2Generator>& gens, double density = 0.3);

}
