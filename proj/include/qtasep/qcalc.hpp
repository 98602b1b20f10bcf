#pragma once

// q-deformed special functions: Pochhammer symbols, q-binomials, the q-geometric
// jump distribution p_{m,alpha} and the coefficients C_a(y,s).

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace qtasep {

/// Thrown when a parameter lies outside the domain where a process or formula is defined.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative or quadrature procedure fails to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The deformation parameter, validated once to lie strictly inside (0,1).
class QParam {
public:
    explicit QParam(double q);
    double value() const noexcept { return q_; }
    operator double() const noexcept { return q_; }

private:
    double q_;
};

using Complex = std::complex<double>;

/// Truncation threshold for infinite products and infinite-support pmfs.
inline constexpr double kTailThreshold = 1e-15;

/// (a;q)_n = prod_{i<n} (1 - a q^i). Empty product for n = 0.
double q_pochhammer(double a, QParam q, int n);
Complex q_pochhammer(Complex a, QParam q, int n);

/// (a;q)_infinity, truncated at the first i with |a| q^i < tol (1-q).
/// Throws ConvergenceError if |a| >= 1/q would require more than the iteration cap.
double q_pochhammer_inf(double a, QParam q, double tol = 1e-17);
Complex q_pochhammer_inf(Complex a, QParam q, double tol = 1e-17);

/// (q;q)_m / ((q;q)_{m-j} (q;q)_j); zero for j outside [0, m].
double q_binomial(int m, int j, QParam q);

/// e_r(1, q, ..., q^{y-1}) = q^{r(r-1)/2} [y choose r]_q.
double elementary_sym_q(int r, int y, QParam q);

/// C_a(y,s) = (-a)^s (-a;q)_{y-s} (q;q)_y / ((q;q)_{y-s} (q;q)_s), zero unless 0 <= s <= y.
double coeff_C(double a, int y, int s, QParam q);

/// All of C_a(y,0..y) at once, linear in y.
std::vector<double> coeff_C_row(double a, int y, QParam q);

/// The q-geometric jump law p_{m,alpha} on {0,...,m}; m = nullopt means m = infinity,
/// in which case the support is truncated with `tail_bound` < 1e-15.
struct JumpDistribution {
    std::optional<int> m;
    double alpha = 0.0;
    std::vector<double> pmf;
    std::vector<double> cdf;
    double tail_bound = 0.0;
    double raw_sum = 0.0;        // sum of the entries before any renormalization
    bool renormalized = false;   // set when |raw_sum - 1| exceeded 1e-12
};

JumpDistribution jump_pmf(std::optional<int> m, double alpha, QParam q);

/// Inverse-CDF draw from a JumpDistribution.
template <class Rng>
int jump_sample(const JumpDistribution& dist, Rng& rng);

/// Uniform double in [0,1) with 53 random bits.
template <class Rng>
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int jump_sample_u(const JumpDistribution& dist, double u);

template <class Rng>
int jump_sample(const JumpDistribution& dist, Rng& rng) {
    return jump_sample_u(dist, uniform01(rng));
}

/// Fast sampler for p_{m,alpha} with fixed alpha: cached CDF tables for small gaps and the
/// infinite gap, exact sequential inversion for larger gaps.
class JumpSampler {
public:
    JumpSampler(double alpha, QParam q, int table_cap = 64);

    double alpha() const noexcept { return alpha_; }
    int sample(std::optional<int> m, double u) const;

private:
    int sample_large(int m, double u) const;

    double alpha_;
    QParam q_;
    std::vector<JumpDistribution> finite_;
    JumpDistribution infinite_;
};

}  // namespace qtasep
