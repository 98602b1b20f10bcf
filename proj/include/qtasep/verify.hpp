#pragma once

// Verification suites. Each check carries the acceptance criterion it belongs to, the
// measured residual (or z-score) and the tolerance it is held to.

#include "qtasep/qcalc.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qtasep {

struct CheckReport {
    std::string name;
    int criterion = 0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckReport> checks;
    double seconds = 0.0;

    bool pass() const;
};

struct VerifyOptions {
    std::uint64_t seed = 20240601;
    int workers = 0;
    std::uint64_t trials = 1000000;
    double q = 0.5;
    /// contour suite: radii (outermost first) of a family to test in place of the built-in
    /// battery; infeasible radii fail with the violated inequality.
    std::optional<std::vector<double>> contour_radii;
    /// truevsmc suite: restrict the statistical battery to N and k (0 = full battery).
    int N = 0;
    int k = 0;
};

const std::vector<std::string>& suite_names();

/// Throws ParameterError for an unknown suite.
SuiteReport run_suite(const std::string& suite, const VerifyOptions& opt);

/// z = |mean - exact| / stderr. A zero stderr (deterministic observable) gives 0 when
/// mean and exact agree to 1e-12 relative, infinity otherwise.
double z_score(double mean, double stderr_, double exact);

std::string to_json(const SuiteReport& r, int indent = 2);

}  // namespace qtasep
