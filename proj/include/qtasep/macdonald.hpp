#pragma once

// First Macdonald difference operators at t = 0, applied to product functions by
// expansion into q-shifted evaluation points.

#include "qtasep/protocol.hpp"
#include "qtasep/qcalc.hpp"

#include <functional>
#include <vector>

namespace qtasep {

using ScalarFn = std::function<double(double)>;

/// One factor of an operator word.
struct MacOp {
    enum class Kind { D, power_sum, coordinate };
    Kind kind;
    int index;  // D_index, p_1 over x_1..x_index, or multiplication by x_index

    static MacOp D(int m) { return {Kind::D, m}; }
    static MacOp p1(int n) { return {Kind::power_sum, n}; }
    static MacOp x(int i) { return {Kind::coordinate, i}; }
};

/// Evaluation points are capped at this many distinct (depth, shift) pairs.
inline constexpr std::size_t kMacdonaldTreeCap = 1000000;

/// (O_1 O_2 ... O_L F)(x) with O_L acting first and F(x) = prod_i f(x_i).
/// D_m = sum_{i<=m} prod_{j<=m, j!=i} (-x_j)/(x_i - x_j) T_{q,x_i}.
double apply_difference_word(const std::vector<MacOp>& word, const ScalarFn& f, const std::vector<double>& x,
                             QParam q);

/// (D_n)^power F at x.
double macdonald_apply_D(int n, int power, const ScalarFn& f, const std::vector<double>& x, QParam q);

/// |[(D_n)^k, p_1] F - (1-q^k) x_n (D_{n-1} - D_n)(D_n)^{k-1} F| at x, for n >= 2.
double verify_commutation(int n, int k, const std::vector<double>& x, const ScalarFn& f, QParam q);

/// (D_1)^{y_1} ... (D_N)^{y_N} Pi / Pi at x = a with Pi = prod_i exp(gamma x_i).
double macdonald_moment(const std::vector<int>& y, double gamma, const std::vector<double>& a, QParam q);

/// Max over y in Y^N_k with y_0 = 0 of |macdonald_moment - nested_moment| (Poisson).
double verify_moment_equality(int N, int k, double gamma, const std::vector<double>& a, QParam q);

}  // namespace qtasep
