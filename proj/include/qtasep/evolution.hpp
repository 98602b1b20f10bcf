#pragma once

// True evolution equations on Y^N_k: the Poisson ODE, the geometric forward map and the
// implicit Bernoulli step.

#include "qtasep/dynamics.hpp"
#include "qtasep/protocol.hpp"
#include "qtasep/qcalc.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace qtasep {

/// (y_0, ..., y_N).
using YVec = std::vector<int>;

/// n weakly decreasing with entries in 0..N.
YVec n_to_y(const std::vector<int>& n, int N);
std::vector<int> y_to_n(const YVec& y);

/// Y^N_k listed so that y' <= y in the suffix-sum order implies y' comes first.
/// Primary key: sum of the suffix sums; ties: (y_N, ..., y_0) lexicographically descending.
class YLattice {
public:
    YLattice(int N, int k);

    int N() const noexcept { return N_; }
    int k() const noexcept { return k_; }
    int size() const noexcept { return static_cast<int>(elems_.size()); }
    const YVec& operator[](int idx) const { return elems_[idx]; }
    const std::vector<YVec>& elements() const noexcept { return elems_; }
    int index_of(const YVec& y) const;
    /// Index of y with s particles moved from site i to i-1.
    int moved(int idx, int i, int s) const;

private:
    int N_, k_;
    std::vector<YVec> elems_;
    std::map<YVec, int> index_;
    std::vector<std::vector<int>> move1_;  // [idx][i] index after one move, -1 if y_i = 0
};

inline constexpr int kMaxLatticeSize = 20000;
inline constexpr const char* kOrderTag = "suffix-lex-v1";

std::vector<YVec> enumerate_Yk(int N, int k);
/// Shared, cached lattice.
std::shared_ptr<const YLattice> lattice(int N, int k);

struct ObservableVector {
    int N = 0;
    int k = 0;
    std::vector<double> values;

    const YLattice& lat() const { return *lattice(N, k); }
    double at(const YVec& y) const { return values[lat().index_of(y)]; }
    double at_n(const std::vector<int>& n) const { return at(n_to_y(n, N)); }
};

ObservableVector apply_L(double a, int i, const ObservableVector& h, QParam q);
ObservableVector apply_A(double a, int i, const ObservableVector& h, QParam q);
Eigen::MatrixXd L_matrix(double a, int i, const YLattice& lat, QParam q);
Eigen::MatrixXd A_matrix(double a, int i, const YLattice& lat, QParam q);
/// sum_i L^{(a_i)}_i.
Eigen::MatrixXd poisson_generator(const std::vector<double>& a, const YLattice& lat, QParam q);
/// Full one-step maps, as dense matrices.
Eigen::MatrixXd geometric_step_matrix(double alpha, const std::vector<double>& a, const YLattice& lat, QParam q);
Eigen::MatrixXd bernoulli_step_matrix(double beta, const std::vector<double>& a, const YLattice& lat, QParam q);

void zero_absorbed(ObservableVector& h);

ObservableVector solve_poisson_true(const ObservableVector& h0, double t, const std::vector<double>& a, QParam q);
ObservableVector step_geometric_true(const ObservableVector& h, double alpha, const std::vector<double>& a, QParam q);
ObservableVector step_bernoulli_true(const ObservableVector& h, double beta, const std::vector<double>& a, QParam q);
ObservableVector evolve_true(const ObservableVector& h0, const Protocol& protocol, const std::vector<double>& a,
                             QParam q, StageOrder order = StageOrder::canonical);

ObservableVector step_init_data(int N, int k);
/// h(y) = prod_i q^{(x_i + i) y_i}, zero where y_0 > 0.
ObservableVector initial_data(const ParticleState& x, int k, QParam q);

std::string to_json(const ObservableVector& h);
ObservableVector observable_from_json(const std::string& text);

}  // namespace qtasep
