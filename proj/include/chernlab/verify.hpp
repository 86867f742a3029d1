#ifndef CHERNLAB_VERIFY_HPP
#define CHERNLAB_VERIFY_HPP

#include "chernlab/config.hpp"

namespace chernlab {

struct SuiteResult {
    std::string name;
    std::vector<std::string> csv;       // header + rows
    std::vector<std::string> failures;  // empty on pass
    std::map<std::string, double> summary;
};

/// Named verification suites driven by `chernlab verify <suite>`:
/// torsion, bochner, conformal, operators, isoperimetric, monotonicity, regularity.
SuiteResult run_suite(const std::string& suite, const Config& cfg);

std::vector<std::string> suite_names();

}  // namespace chernlab

#endif
