#include "qtasep/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace qtasep {

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t trial) {
    // splitmix64 finalizer over a Weyl sequence
    std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (trial + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng trajectory_rng(std::uint64_t master_seed, std::uint64_t trial) {
    return Rng(stream_seed(master_seed, trial));
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

struct Moments {
    double n = 0.0;
    std::vector<double> mean, m2;
};

void merge(Moments& into, const Moments& from) {
    if (from.n == 0.0) return;
    if (into.n == 0.0) {
        into = from;
        return;
    }
    const double n = into.n + from.n;
    for (std::size_t k = 0; k < into.mean.size(); ++k) {
        const double delta = from.mean[k] - into.mean[k];
        into.mean[k] += delta * from.n / n;
        into.m2[k] += from.m2[k] + delta * delta * into.n * from.n / n;
    }
    into.n = n;
}

}  // namespace

std::vector<Estimate> mc_run(std::size_t width, const TrialFn& fn, const McOptions& opt) {
    if (opt.trials < 2) throw ParameterError("Monte Carlo needs at least 2 trials");
    const std::uint64_t chunk = std::max<std::uint64_t>(opt.chunk, 1);
    const std::uint64_t chunks = (opt.trials + chunk - 1) / chunk;
    std::vector<Moments> parts(chunks);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        std::vector<double> out(width);
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= chunks) return;
            Moments m;
            m.mean.assign(width, 0.0);
            m.m2.assign(width, 0.0);
            const std::uint64_t end = std::min(opt.trials, (c + 1) * chunk);
            try {
                for (std::uint64_t j = c * chunk; j < end; ++j) {
                    Rng rng = trajectory_rng(opt.seed, j);
                    fn(rng, out.data());
                    m.n += 1.0;
                    for (std::size_t k = 0; k < width; ++k) {
                        const double d = out[k] - m.mean[k];
                        m.mean[k] += d / m.n;
                        m.m2[k] += d * (out[k] - m.mean[k]);
                    }
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = chunks;
                return;
            }
            parts[c] = std::move(m);
        }
    };

    const int workers = std::min<std::uint64_t>(resolve_workers(opt.workers), chunks);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    Moments total;
    for (const Moments& m : parts) merge(total, m);
    std::vector<Estimate> est(width);
    for (std::size_t k = 0; k < width; ++k) {
        const double var = total.m2[k] / (total.n - 1.0);
        est[k] = {total.mean[k], std::sqrt(std::max(var, 0.0) / total.n), opt.trials};
    }
    return est;
}

std::vector<std::vector<Estimate>> mc_moments(const ParticleState& initial, const ProcessParams& p,
                                              const std::vector<Stage>& stages,
                                              const std::vector<std::size_t>& checkpoints,
                                              const std::vector<std::vector<int>>& observables,
                                              const McOptions& opt) {
    initial.validate();
    if (p.size() < initial.size()) throw ParameterError("rate vector shorter than particle count");
    for (std::size_t c : checkpoints)
        if (c > stages.size()) throw ParameterError("checkpoint beyond the last stage");
    const std::size_t nobs = observables.size();
    const std::size_t width = nobs * checkpoints.size();
    const QParam q = p.q;
    // Checkpoints may be unsorted; run them in sorted order and map back.
    std::vector<std::size_t> order(checkpoints.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return checkpoints[a] < checkpoints[b]; });
    std::vector<std::size_t> sorted(checkpoints.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = checkpoints[order[i]];
    TrialFn sorted_fn = [&](Rng& rng, double* out) {
        ParticleState s = initial;
        std::size_t done = 0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            while (done < sorted[i]) apply_stage(s, stages[done++], p, rng);
            for (std::size_t o = 0; o < nobs; ++o) out[order[i] * nobs + o] = observable_q(s, observables[o], q);
        }
    };
    const auto flat = mc_run(width, sorted_fn, opt);
    std::vector<std::vector<Estimate>> out(checkpoints.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
        out[c].assign(flat.begin() + c * nobs, flat.begin() + (c + 1) * nobs);
    return out;
}

Estimate mc_expectation(const Protocol& protocol, const std::vector<int>& n, const ProcessParams& p,
                        const ParticleState& initial, const McOptions& opt, StageOrder order) {
    p.validate(&protocol);
    const auto stages = stages_of(protocol, order);
    return mc_moments(initial, p, stages, {stages.size()}, {n}, opt)[0][0];
}

std::vector<Estimate> mc_histogram(const ParticleState& initial, const ProcessParams& p,
                                   const std::vector<Stage>& stages, int n, int max_bin,
                                   const McOptions& opt) {
    if (n < 1 || n > initial.size()) throw ParameterError("histogram particle index out of range");
    if (max_bin < 0) throw ParameterError("max_bin must be nonnegative");
    TrialFn fn = [&](Rng& rng, double* out) {
        ParticleState s = initial;
        for (const Stage& st : stages) apply_stage(s, st, p, rng);
        const std::int64_t v = s.x[n - 1] + n;
        std::fill(out, out + max_bin + 1, 0.0);
        out[std::clamp<std::int64_t>(v, 0, max_bin)] = 1.0;
    };
    return mc_run(max_bin + 1, fn, opt);
}

DualityResult duality_check(const ParticleState& x0, const ZeroRangeState& y0,
                            const std::vector<Stage>& stages, const ProcessParams& p,
                            const McOptions& opt) {
    x0.validate();
    y0.validate();
    if (y0.sites() != x0.size()) throw ParameterError("duality_check: y0 must have N+1 sites");
    for (const Stage& st : stages)
        if (st.kind == Stage::Kind::bernoulli) throw ParameterError("no zero-range dual for Bernoulli steps");

    DualityResult r;
    TrialFn lhs = [&](Rng& rng, double* out) {
        ParticleState s = x0;
        for (const Stage& st : stages) apply_stage(s, st, p, rng);
        out[0] = duality_H(s, y0, p.q);
    };
    r.lhs = mc_run(1, lhs, opt)[0];

    TrialFn rhs = [&](Rng& rng, double* out) {
        ZeroRangeState y = y0;
        for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
            if (it->kind == Stage::Kind::poisson) evolve_zero_range_poisson(y, it->value, p, rng);
            else step_zero_range_geometric(y, it->value, p, rng);
        }
        out[0] = duality_H(x0, y, p.q);
    };
    McOptions dual = opt;
    dual.seed = stream_seed(opt.seed, std::numeric_limits<std::uint64_t>::max());
    r.rhs = mc_run(1, rhs, dual)[0];

    const double se = std::hypot(r.lhs.stderr_, r.rhs.stderr_);
    const double diff = std::abs(r.lhs.mean - r.rhs.mean);
    r.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return r;
}

}  // namespace qtasep
