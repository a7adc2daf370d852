#pragma once
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace rfh {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    double budget = 0;  // wall-clock limit in seconds (0: none)
};

struct SuiteResult {
    std::vector<CriterionResult> criteria;
    std::map<std::string, std::string> artifacts;  // file name -> contents

    bool all_pass() const;
};

struct SuiteOptions {
    uint64_t seed = 20240611;
    std::set<int> only;           // empty: all ten criteria
    int flow_grid = 65;           // odd grid for the flow and hybrid runs
};

// Runs the acceptance criteria; criterion 10 reruns 1-9 and compares artifacts byte for byte.
SuiteResult run_acceptance(const SuiteOptions& opt = {});

std::string format_line(const CriterionResult& r);
void write_artifacts(const SuiteResult& r, const std::string& dir);

}
