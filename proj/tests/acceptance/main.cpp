// One line per acceptance criterion; exit status 1 if any fails.
#include "rfhlab/acceptance.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv)
{
    rfh::SuiteOptions opt;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--seed" && i + 1 < argc)
            opt.seed = std::strtoull(argv[++i], nullptr, 10);
        else if (a == "--only" && i + 1 < argc)
            opt.only.insert(std::atoi(argv[++i]));
    }
    auto res = rfh::run_acceptance(opt);
    for (const auto& c : res.criteria) std::printf("%s\n", rfh::format_line(c).c_str());
    std::printf("%s\n", res.all_pass() ? "acceptance: all criteria passed" : "acceptance: FAILED");
    return res.all_pass() ? 0 : 1;
}
