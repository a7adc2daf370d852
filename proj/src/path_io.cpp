#include "rfhlab/errors.hpp"
#include "rfhlab/rsindex.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace rfh {

static std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string path_to_csv(const SymplecticPath& p)
{
    const int d = p.dim();
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) os << ",m" << i << "_" << j;
    os << "\n";
    for (size_t k = 0; k < p.times().size(); ++k) {
        os << fmt(p.times()[k]);
        const Mat& m = p.samples()[k];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) os << "," << fmt(m(i, j));
        os << "\n";
    }
    return os.str();
}

SymplecticPath path_from_csv(const std::string& text, const Mat& structure)
{
    std::istringstream is(text);
    std::string line;
    std::vector<double> t;
    std::vector<Mat> samples;
    int d = -1;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == 't') continue;  // header
        std::vector<double> vals;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("path csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        int n = static_cast<int>(vals.size()) - 1;
        int dd = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
        if (n <= 0 || dd * dd != n || dd % 2 != 0)
            throw ConfigError("path csv line " + std::to_string(lineno) + ": entry count is not (2m)^2");
        if (d < 0) d = dd;
        if (dd != d) throw ConfigError("path csv line " + std::to_string(lineno) + ": inconsistent dimension");
        t.push_back(vals[0]);
        Mat m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = vals[1 + i * d + j];
        samples.push_back(m);
    }
    if (t.size() < 2) throw ConfigError("path csv: need at least two samples");
    Mat J = structure.size() ? structure : standard_j(d / 2);
    if (J.rows() != d) throw ConfigError("path csv: structure dimension mismatch");
    SymplecticPath p = interpolated_path(J, t, samples);
    p.validate(1e-8);
    return p;
}

SymplecticPath path_from_csv(const std::string& text)
{
    return path_from_csv(text, Mat());
}

}
