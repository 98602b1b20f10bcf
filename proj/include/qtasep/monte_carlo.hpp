#pragma once

// Reproducible Monte Carlo estimation. Trials are grouped into fixed chunks that do not
// depend on the worker count, and chunk statistics are merged in chunk order, so results
// are bit-identical for any number of threads.

#include "qtasep/dynamics.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace qtasep {

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t trials = 0;
};

struct McOptions {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    int workers = 0;  // 0: hardware concurrency
    std::uint64_t chunk = 1024;
};

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t trial);
Rng trajectory_rng(std::uint64_t master_seed, std::uint64_t trial);
int resolve_workers(int requested);

/// One trajectory fills `out` (length `width`) from its private stream.
using TrialFn = std::function<void(Rng& rng, double* out)>;

/// Mean and standard error of each of the `width` outputs of `fn` over opt.trials.
std::vector<Estimate> mc_run(std::size_t width, const TrialFn& fn, const McOptions& opt);

/// Moments prod q^{x_{n_i}+n_i} sampled after stages checkpoint[c] stages have run.
/// Result is indexed [c][observable].
std::vector<std::vector<Estimate>> mc_moments(const ParticleState& initial, const ProcessParams& p,
                                              const std::vector<Stage>& stages,
                                              const std::vector<std::size_t>& checkpoints,
                                              const std::vector<std::vector<int>>& observables,
                                              const McOptions& opt);

/// The single-query form: one protocol, one n-vector.
Estimate mc_expectation(const Protocol& protocol, const std::vector<int>& n, const ProcessParams& p,
                        const ParticleState& initial, const McOptions& opt,
                        StageOrder order = StageOrder::canonical);

/// Histogram of x_n + n after all stages, bins 0..max_bin (last bin collects the rest).
std::vector<Estimate> mc_histogram(const ParticleState& initial, const ProcessParams& p,
                                   const std::vector<Stage>& stages, int n, int max_bin,
                                   const McOptions& opt);

struct DualityResult {
    Estimate lhs;  // E^x[H(x(t); y0)]
    Estimate rhs;  // E^y[H(x0; y(t))]
    double z = 0.0;
};

/// Poisson (stages of kind poisson) or geometric duality. The dual side runs the stages in
/// reverse order, which matters only for time-inhomogeneous schedules.
DualityResult duality_check(const ParticleState& x0, const ZeroRangeState& y0,
                            const std::vector<Stage>& stages, const ProcessParams& p,
                            const McOptions& opt);

}  // namespace qtasep
