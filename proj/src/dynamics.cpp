#include "qtasep/dynamics.hpp"

#include "qtasep/monte_carlo.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <string>

namespace qtasep {

std::optional<std::int64_t> ParticleState::gap(int i) const {
    if (i < 1 || i > size()) throw ParameterError("gap: particle index out of range");
    if (i == 1) return std::nullopt;
    return x[i - 2] - x[i - 1] - 1;
}

void ParticleState::validate() const {
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i - 1] > x[i])) {
            throw ParameterError("particle positions must be strictly decreasing (x_" +
                                 std::to_string(i) + " <= x_" + std::to_string(i + 1) + ")");
        }
    }
}

ParticleState step_initial(int N) {
    if (N < 1) throw ParameterError("step_initial: N must be positive");
    ParticleState s;
    s.x.resize(N);
    for (int i = 0; i < N; ++i) s.x[i] = -(i + 1);
    return s;
}

void ProcessParams::validate(const Protocol* protocol) const {
    if (a.empty()) throw ParameterError("rate vector a is empty");
    for (double ai : a)
        if (!(ai > 0.0)) throw ParameterError("rate parameters a_i must be positive");
    if (!protocol) return;
    for (double al : protocol->alpha) {
        for (double ai : a) {
            if (!(ai * al < 1.0)) {
                throw ParameterError("a_i * alpha must be < 1 (got " + std::to_string(ai * al) + ")");
            }
        }
    }
}

ProcessParams unit_rates(int N, double q) { return ProcessParams{std::vector<double>(N, 1.0), QParam(q)}; }

namespace {

double exp_wait(double rate, Rng& rng) { return -std::log1p(-uniform01(rng)) / rate; }

// Picks index i with probability w[i] / total.
int pick(const std::vector<double>& w, double total, Rng& rng) {
    double target = uniform01(rng) * total;
    int last = -1;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        last = static_cast<int>(i);
        if (target < w[i]) return last;
        target -= w[i];
    }
    return last;
}

class SamplerCache {
public:
    const std::vector<const JumpSampler*>& get(double alpha, const ProcessParams& p) {
        if (alpha == alpha_ && p.q.value() == q_ && p.a == a_) return ptrs_;
        if (store_.size() > 4096) store_.clear();
        alpha_ = alpha;
        q_ = p.q.value();
        a_ = p.a;
        ptrs_.clear();
        for (double ai : p.a) {
            const double b = ai * alpha;
            if (!(b > 0.0 && b < 1.0)) {
                alpha_ = -1.0;
                throw ParameterError("geometric step needs 0 < a_i alpha < 1 (got " +
                                     std::to_string(b) + ")");
            }
            auto& slot = store_[{b, q_}];
            if (!slot) slot = std::make_unique<JumpSampler>(b, p.q);
            ptrs_.push_back(slot.get());
        }
        return ptrs_;
    }

private:
    std::map<std::pair<double, double>, std::unique_ptr<JumpSampler>> store_;
    double alpha_ = -1.0;
    double q_ = -1.0;
    std::vector<double> a_;
    std::vector<const JumpSampler*> ptrs_;
};

}  // namespace

void evolve_poisson(ParticleState& s, double duration, const ProcessParams& p, Rng& rng) {
    const int N = s.size();
    if (p.size() < N) throw ParameterError("rate vector shorter than particle count");
    if (!(duration > 0.0)) return;
    const double q = p.q.value();
    std::vector<double> rate(N);
    auto refresh = [&](int i) {
        rate[i] = i == 0 ? p.a[0] : p.a[i] * (1.0 - std::pow(q, double(s.x[i - 1] - s.x[i] - 1)));
    };
    double total = 0.0;
    for (int i = 0; i < N; ++i) {
        refresh(i);
        total += rate[i];
    }
    double t = 0.0;
    std::uint64_t events = 0;
    while (total > 0.0) {
        t += exp_wait(total, rng);
        if (t > duration) break;
        const int i = pick(rate, total, rng);
        ++s.x[i];
        for (int j = i; j <= std::min(i + 1, N - 1); ++j) {
            total -= rate[j];
            refresh(j);
            total += rate[j];
        }
        if (++events % 1024 == 0) {
            total = 0.0;
            for (double r : rate) total += r;
        }
    }
}

void step_geometric(ParticleState& s, double alpha, const ProcessParams& p, Rng& rng) {
    thread_local SamplerCache cache;
    const int N = s.size();
    if (p.size() < N) throw ParameterError("rate vector shorter than particle count");
    const auto& samplers = cache.get(alpha, p);
    std::vector<int> jumps(N);  // parallel update: all gaps read before any move
    for (int i = 0; i < N; ++i) {
        std::optional<int> gap;
        if (i > 0) gap = static_cast<int>(s.x[i - 1] - s.x[i] - 1);
        jumps[i] = samplers[i]->sample(gap, uniform01(rng));
    }
    for (int i = 0; i < N; ++i) s.x[i] += jumps[i];
}

void step_bernoulli(ParticleState& s, double beta, const ProcessParams& p, Rng& rng) {
    if (!(beta > 0.0)) throw ParameterError("beta must be positive");
    const int N = s.size();
    if (p.size() < N) throw ParameterError("rate vector shorter than particle count");
    const double q = p.q.value();
    bool prev_jumped = false;
    std::int64_t prev_old = 0;
    for (int i = 0; i < N; ++i) {
        const double ab = p.a[i] * beta;
        double prob = ab / (1.0 + ab);
        if (i > 0 && !prev_jumped) prob *= 1.0 - std::pow(q, double(prev_old - s.x[i] - 1));
        prev_old = s.x[i];
        prev_jumped = uniform01(rng) < prob;
        if (prev_jumped) ++s.x[i];
    }
}

void apply_stage(ParticleState& s, const Stage& stage, const ProcessParams& p, Rng& rng) {
    switch (stage.kind) {
        case Stage::Kind::poisson: evolve_poisson(s, stage.value, p, rng); break;
        case Stage::Kind::geometric: step_geometric(s, stage.value, p, rng); break;
        case Stage::Kind::bernoulli: step_bernoulli(s, stage.value, p, rng); break;
    }
}

double observable_q(const ParticleState& s, const std::vector<int>& n, QParam q) {
    double exponent = 0.0;
    bool zero = false;
    for (int ni : n) {
        if (ni < 0 || ni > s.size()) throw ParameterError("observable index out of range");
        if (ni == 0) zero = true;
        else exponent += double(s.x[ni - 1] + ni);
    }
    return zero ? 0.0 : std::pow(q.value(), exponent);
}

int ZeroRangeState::total() const {
    int t = 0;
    for (int v : y) t += v;
    return t;
}

void ZeroRangeState::validate() const {
    if (y.empty()) throw ParameterError("zero-range state needs site 0");
    for (int v : y)
        if (v < 0) throw ParameterError("occupations must be nonnegative");
}

void evolve_zero_range_poisson(ZeroRangeState& s, double duration, const ProcessParams& p, Rng& rng) {
    const int N = s.sites();
    if (p.size() < N) throw ParameterError("rate vector shorter than site count");
    if (!(duration > 0.0)) return;
    const double q = p.q.value();
    std::vector<double> rate(N + 1, 0.0);
    auto refresh = [&](int i) { rate[i] = i == 0 ? 0.0 : p.a[i - 1] * (1.0 - std::pow(q, s.y[i])); };
    double total = 0.0;
    for (int i = 1; i <= N; ++i) {
        refresh(i);
        total += rate[i];
    }
    double t = 0.0;
    while (total > 1e-300) {
        t += exp_wait(total, rng);
        if (t > duration) break;
        const int i = pick(rate, total, rng);
        --s.y[i];
        ++s.y[i - 1];
        total = 0.0;
        refresh(i);
        refresh(i - 1);
        for (double r : rate) total += r;
    }
}

int zero_range_site_movers(int y, double b, QParam q, Rng& rng) {
    int stay = 0, moved = 0;
    double factor = b;  // b q^{stay}
    for (int j = 0; j < y; ++j) {
        if (uniform01(rng) < factor) {
            ++moved;
        } else {
            ++stay;
            factor *= q.value();
        }
    }
    return moved;
}

void step_zero_range_geometric(ZeroRangeState& s, double alpha, const ProcessParams& p, Rng& rng) {
    const int N = s.sites();
    if (p.size() < N) throw ParameterError("rate vector shorter than site count");
    std::vector<int> movers(N + 1, 0);
    for (int i = 1; i <= N; ++i) {
        const double b = p.a[i - 1] * alpha;
        if (!(b > 0.0 && b < 1.0)) throw ParameterError("zero-range step needs 0 < a_i alpha < 1");
        movers[i] = zero_range_site_movers(s.y[i], b, p.q, rng);
    }
    for (int i = 1; i <= N; ++i) {
        s.y[i] -= movers[i];
        s.y[i - 1] += movers[i];
    }
}

double duality_H(const ParticleState& x, const ZeroRangeState& y, QParam q) {
    if (y.sites() != x.size()) throw ParameterError("duality_H: size mismatch");
    if (y.y[0] > 0) return 0.0;
    double exponent = 0.0;
    for (int i = 1; i <= x.size(); ++i) exponent += double(x.x[i - 1] + i) * y.y[i];
    return std::pow(q.value(), exponent);
}

void dump_trajectories(std::ostream& os, const ParticleState& initial, const ProcessParams& p,
                       const std::vector<Stage>& stages, std::uint64_t trials,
                       std::uint64_t master_seed) {
    os << "trial,time,particle,position\n";
    for (std::uint64_t j = 0; j < trials; ++j) {
        Rng rng = trajectory_rng(master_seed, j);
        ParticleState s = initial;
        double time = 0.0;
        auto emit = [&] {
            for (int i = 0; i < s.size(); ++i) os << j << ',' << time << ',' << i + 1 << ',' << s.x[i] << '\n';
        };
        emit();
        for (const Stage& st : stages) {
            apply_stage(s, st, p, rng);
            time += st.kind == Stage::Kind::poisson ? st.value : 1.0;
            emit();
        }
    }
}

}  // namespace qtasep
