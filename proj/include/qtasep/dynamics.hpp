#pragma once

// Simulators for Poisson, geometric and Bernoulli q-TASEP and the zero-range duals.

#include "qtasep/protocol.hpp"
#include "qtasep/qcalc.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

namespace qtasep {

using Rng = std::mt19937_64;

/// Positions x_1 > x_2 > ... > x_N; x_0 = +infinity is implicit. Stored 0-based.
struct ParticleState {
    std::vector<std::int64_t> x;

    int size() const noexcept { return static_cast<int>(x.size()); }
    /// gap_i for 1-based i; nullopt for i = 1.
    std::optional<std::int64_t> gap(int i) const;
    /// Throws ParameterError unless strictly decreasing.
    void validate() const;
    bool operator==(const ParticleState&) const = default;
};

ParticleState step_initial(int N);

struct ProcessParams {
    std::vector<double> a;
    QParam q{0.5};

    int size() const noexcept { return static_cast<int>(a.size()); }
    /// a_i > 0, and a_i alpha < 1 for every alpha of the protocol.
    void validate(const Protocol* protocol = nullptr) const;
};

/// Constant rates a_i = 1.
ProcessParams unit_rates(int N, double q);

void evolve_poisson(ParticleState& s, double duration, const ProcessParams& p, Rng& rng);
void step_geometric(ParticleState& s, double alpha, const ProcessParams& p, Rng& rng);
void step_bernoulli(ParticleState& s, double beta, const ProcessParams& p, Rng& rng);
void apply_stage(ParticleState& s, const Stage& stage, const ProcessParams& p, Rng& rng);

/// prod_i q^{x_{n_i} + n_i}; zero as soon as some n_i = 0.
double observable_q(const ParticleState& s, const std::vector<int>& n, QParam q);

/// Occupations (y_0, ..., y_N); site 0 absorbs.
struct ZeroRangeState {
    std::vector<int> y;

    int sites() const noexcept { return static_cast<int>(y.size()) - 1; }
    int total() const;
    void validate() const;
    bool operator==(const ZeroRangeState&) const = default;
};

void evolve_zero_range_poisson(ZeroRangeState& s, double duration, const ProcessParams& p, Rng& rng);
void step_zero_range_geometric(ZeroRangeState& s, double alpha, const ProcessParams& p, Rng& rng);

/// Number of the y particles at one site that leave in a geometric step. Particles are
/// scanned bottom-up and the j-th leaves with probability b q^{u_j}, u_j being the number
/// of lower particles that stay. The law is p_{y,b}.
int zero_range_site_movers(int y, double b, QParam q, Rng& rng);

/// H(x;y) = prod_{i>=0} q^{(x_i + i) y_i}, zero when y_0 > 0.
double duality_H(const ParticleState& x, const ZeroRangeState& y, QParam q);

/// Writes `trial,time,particle,position` rows: one block per trial at time 0 and after
/// each stage; time is cumulative Poisson time plus the number of discrete steps.
void dump_trajectories(std::ostream& os, const ParticleState& initial, const ProcessParams& p,
                       const std::vector<Stage>& stages, std::uint64_t trials,
                       std::uint64_t master_seed);

}  // namespace qtasep
