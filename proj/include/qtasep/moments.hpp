#pragma once

// Nested contour integral moment formulas, evaluated by the product trapezoid rule on
// circles with a common center, plus residual checks of the free evolution system.

#include "qtasep/protocol.hpp"
#include "qtasep/qcalc.hpp"

#include <string>
#include <vector>

namespace qtasep {

struct Circle {
    double center = 1.0;
    double radius = 0.5;
    int nodes = 64;
};

/// circles[0] is z_1 (outermost), circles[k-1] is z_k (innermost).
struct ContourFamily {
    std::vector<Circle> circles;

    int k() const noexcept { return static_cast<int>(circles.size()); }
    ContourFamily doubled() const;
    std::string describe() const;
};

/// Raised by contour construction or validation; the message names the violated inequality.
class ContourError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Common center c = (min a + max a)/2, r_k = max|a_i - c| + margin c,
/// r_A = (1-q)c + q r_{A+1} + gap c. M = 0 picks nodes per circle from the analyticity
/// annulus of the integrand (see auto_contours).
ContourFamily default_contours(int k, QParam q, const std::vector<double>& a, double margin = 0.1,
                               double gap = 0.02, int M = 0, const Protocol* spec = nullptr);

/// Radii chosen to maximize the smallest convergence ratio, nodes chosen so the trapezoid
/// error estimate is below `tol`.
ContourFamily auto_contours(int k, QParam q, const std::vector<double>& a, const Protocol& spec,
                            double tol = 1e-11);

/// Throws ContourError on nesting, containment, exclusion or pole-exclusion failure.
void validate_contours(const ContourFamily& cf, QParam q, const std::vector<double>& a,
                       const Protocol* spec = nullptr);

/// Estimated geometric convergence ratio of the trapezoid rule on each circle.
std::vector<double> convergence_ratios(const ContourFamily& cf, QParam q, const std::vector<double>& a,
                                       const Protocol* spec = nullptr);

/// f(qz)/f(z) for the protocol; combined protocols multiply all three factors.
Complex f_ratio(const Protocol& spec, Complex z, QParam q);

/// Values of the contour integral for every n in {0..nmax}^k (sorted or not).
struct MomentTable {
    int k = 0;
    int nmax = 0;
    std::vector<Complex> values;
    std::vector<Complex> time_derivative;  // d/d(gamma), filled on request
    ContourFamily contours;                // family actually used for `values`
    double doubling_change = 0.0;          // max |change| between M and 2M

    std::size_t flat(const std::vector<int>& n) const;
    Complex at(const std::vector<int>& n) const { return values[flat(n)]; }
    Complex dt_at(const std::vector<int>& n) const { return time_derivative[flat(n)]; }
};

inline constexpr double kDoublingTolerance = 1e-9;

/// Evaluates on `cf`, then on cf.doubled(), repeating until consecutive results differ by
/// less than kDoublingTolerance; the finer result is returned. With certify = false a
/// single evaluation on `cf` is returned.
MomentTable moment_table(const Protocol& spec, int k, int nmax, const std::vector<double>& a, QParam q,
                         const ContourFamily& cf, bool time_derivative = false, bool certify = true);
MomentTable moment_table(const Protocol& spec, int k, int nmax, const std::vector<double>& a, QParam q,
                         bool time_derivative = false);

struct MomentResult {
    double value = 0.0;
    double im_part = 0.0;
    double doubling_change = 0.0;
    std::vector<int> nodes;
};

/// n must be weakly decreasing with entries in 0..a.size().
MomentResult nested_moment(const Protocol& spec, const std::vector<int>& n, const std::vector<double>& a,
                           QParam q, const ContourFamily& cf);
MomentResult nested_moment(const Protocol& spec, const std::vector<int>& n, const std::vector<double>& a,
                           QParam q);

/// k = 1 by residues at distinct a_1..a_n.
double moment_k1_residues(const Protocol& spec, int n, const std::vector<double>& a, QParam q);

/// Max residual of the free evolution equation at n (entries >= 1, any order). Poisson
/// uses the exact time derivative at gamma; discrete flavors check the last step of the
/// schedule against the protocol with that step removed. Combined protocols use the
/// Poisson form.
double free_equation_residual(const Protocol& spec, const std::vector<int>& n, const std::vector<double>& a,
                              QParam q);
/// |([grad]_i - q [grad]_{i+1}) u(n)|, 1-based i with n_i = n_{i+1} >= 1.
double boundary_residual(const Protocol& spec, const std::vector<int>& n, int i, const std::vector<double>& a,
                         QParam q);

/// k = 2: (1/(2 pi i)^2) double integral of (z_1 - q z_2) cross(z_1,z_2) G(z_1) G(z_2), which
/// vanishes for any G analytic near the contours when both share one circle.
Complex symmetrization_integral(const Circle& c, QParam q, Complex (*G)(Complex));

}  // namespace qtasep
