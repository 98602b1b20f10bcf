#pragma once

// Fredholm determinant formulas for the q-Laplace transform E[1/(zeta q^{x_n(t)+n};q)_inf]
// with a_i = 1, and recovery of the law of x_n(t)+n by contour inversion.

#include "qtasep/protocol.hpp"
#include "qtasep/qcalc.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace qtasep {

/// Trapezoid discretization of a positively oriented circle; weights[j] = dz at node j.
struct KernelGrid {
    Complex center;
    double radius = 1.0;
    std::vector<Complex> nodes;
    std::vector<Complex> weights;

    int size() const noexcept { return static_cast<int>(nodes.size()); }
};

KernelGrid circle_grid(Complex center, double radius, int M);

using Kernel = std::function<Complex(Complex, Complex)>;

/// Nystrom matrix D_ij = K(w_i, w_j) weights_j / (2 pi i).
Eigen::MatrixXcd nystrom_matrix(const Kernel& K, const KernelGrid& grid);
/// det(I + D) by partially pivoted LU.
Complex fredholm_det(const Eigen::MatrixXcd& D);
Complex fredholm_det(const Kernel& K, const KernelGrid& grid);

struct TransformPoint {
    Complex zeta;
    Protocol spec;
    int n = 1;
    QParam q{0.5};
};

/// Panelwise Gauss-Legendre over Re s = 1/2, |Im s| <= s_max. s_max = 0 picks
/// max(12, ceil(35 / (pi - |arg(-zeta)|))).
struct SQuadrature {
    double s_max = 0.0;
    double panel = 1.0;
};

/// Radius of C_1: 0.9 (1 - sqrt q)/(1 + sqrt q).
double c1_radius(QParam q);
KernelGrid c1_grid(QParam q, int M);
/// C_{0,1}: center 1/2, radius 3/4.
KernelGrid c01_grid(int M);
double effective_s_max(Complex zeta, const SQuadrature& sq);

/// h(q^s w)/h(w) with h(w) = (w;q)_inf^n f(w).
Complex h_ratio(const Protocol& spec, int n, Complex w, Complex s, QParam q);

Complex mb_kernel(Complex w, Complex wp, const TransformPoint& p, const SQuadrature& sq = {});
Complex cauchy_kernel(Complex w, Complex wp, const TransformPoint& p);

struct DetResult {
    Complex value;
    int nodes = 0;
    double doubling_change = 0.0;
    double s_max = 0.0;
};

inline constexpr double kDetTolerance = 1e-10;

/// Nystrom matrices for every node pair, assembled from per-(s, w) factors.
Eigen::MatrixXcd mb_matrix(const TransformPoint& p, const KernelGrid& grid, const SQuadrature& sq);
Eigen::MatrixXcd cauchy_matrix(const Protocol& spec, int n, QParam q, const KernelGrid& grid);

/// det(I + K_zeta), nodes doubled from M0 until the change is below kDetTolerance.
DetResult q_laplace_mb(const TransformPoint& p, const SQuadrature& sq = {}, int M0 = 64);
/// det(I + zeta K~)/(zeta;q)_inf.
DetResult q_laplace_cauchy(const TransformPoint& p, int M0 = 64);

/// The Cauchy kernel does not depend on zeta, so one converged discretization serves
/// every zeta. det(zeta) = prod_i (1 + zeta lambda_i) over the eigenvalues of D.
class CauchyTransform {
public:
    CauchyTransform(const Protocol& spec, int n, QParam q, int M0 = 64);

    Complex det(Complex zeta) const;
    Complex transform(Complex zeta) const;  // det / (zeta;q)_inf
    int nodes() const noexcept { return static_cast<int>(lambda_.size()); }
    const Eigen::VectorXcd& eigenvalues() const noexcept { return lambda_; }
    double doubling_change() const noexcept { return change_; }
    QParam q() const noexcept { return q_; }

private:
    Eigen::VectorXcd lambda_;
    QParam q_;
    double change_ = 0.0;
};

/// sum_m pmf[m] / (zeta q^m; q)_inf.
Complex q_laplace_direct(const std::vector<double>& pmf, Complex zeta, QParam q);

/// Law of X on {0..T} from mu_j = E[q^{jX}], j = 0..T.
std::vector<double> pmf_from_moments(const std::vector<double>& mu, QParam q);

/// Law of x_n(t) + n for Bernoulli q-TASEP with a_i = 1 from step initial data, via the
/// true evolution moments.
std::vector<double> bernoulli_exact_pmf(int n, const std::vector<double>& betas, QParam q);

struct InversionContour {
    double center = 1.0;
    double radius = 1.0;
    int nodes = 64;
};

/// Center (1 + q^{-(m+1)})/2, radius halfway between enclosing {q^{-j}}_{j<=m+1} and
/// excluding q^{-(m+2)}.
InversionContour default_inversion_contour(int m, QParam q);

struct InversionResult {
    double probability = 0.0;
    double im_part = 0.0;
    int nodes = 0;
    double doubling_change = 0.0;
};

/// P(X = m) = -q^m (1/2 pi i) \oint (q^{m+1} zeta; q)_inf G(zeta) dzeta.
InversionResult invert_q_laplace(const std::function<Complex(Complex)>& G, int m, QParam q,
                                 std::optional<InversionContour> contour = std::nullopt);
/// Same, with (q^{m+1} zeta;q)_inf / (zeta;q)_inf = 1/(zeta;q)_{m+1} cancelled exactly.
InversionResult invert_q_laplace(const CauchyTransform& G, int m,
                                 std::optional<InversionContour> contour = std::nullopt);

}  // namespace qtasep
