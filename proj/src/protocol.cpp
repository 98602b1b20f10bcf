#include "qtasep/protocol.hpp"

#include "qtasep/qcalc.hpp"

#include <algorithm>
#include <string>

namespace qtasep {

std::string_view flavor_name(Flavor f) noexcept {
    switch (f) {
        case Flavor::poisson: return "poisson";
        case Flavor::geometric: return "geometric";
        case Flavor::bernoulli: return "bernoulli";
        case Flavor::combined: return "combined";
    }
    return "unknown";
}

Flavor parse_flavor(std::string_view name) {
    if (name == "poisson" || name == "Poi") return Flavor::poisson;
    if (name == "geometric" || name == "geo") return Flavor::geometric;
    if (name == "bernoulli" || name == "Ber") return Flavor::bernoulli;
    if (name == "combined") return Flavor::combined;
    throw ParameterError("unknown flavor '" + std::string(name) + "'");
}

Protocol Protocol::poisson(double t) {
    if (!(t >= 0.0)) throw ParameterError("poisson time must be nonnegative");
    Protocol p;
    p.flavor = Flavor::poisson;
    p.gamma = t;
    return p;
}

Protocol Protocol::geometric(std::vector<double> alphas) {
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0)) throw ParameterError("alpha_schedule entries must lie in (0,1)");
    Protocol p;
    p.flavor = Flavor::geometric;
    p.alpha = std::move(alphas);
    return p;
}

Protocol Protocol::geometric(double alpha, int steps) {
    return geometric(std::vector<double>(std::max(steps, 0), alpha));
}

Protocol Protocol::bernoulli(std::vector<double> betas) {
    for (double b : betas)
        if (!(b > 0.0)) throw ParameterError("beta_schedule entries must be positive");
    Protocol p;
    p.flavor = Flavor::bernoulli;
    p.beta = std::move(betas);
    return p;
}

Protocol Protocol::bernoulli(double beta, int steps) {
    return bernoulli(std::vector<double>(std::max(steps, 0), beta));
}

Protocol Protocol::combined(double gamma, std::vector<double> alphas, std::vector<double> betas) {
    Protocol p = geometric(std::move(alphas));
    p.beta = bernoulli(std::move(betas)).beta;
    if (!(gamma >= 0.0)) throw ParameterError("gamma must be nonnegative");
    p.gamma = gamma;
    p.flavor = Flavor::combined;
    return p;
}

double Protocol::time() const noexcept {
    switch (flavor) {
        case Flavor::poisson: return gamma;
        case Flavor::geometric: return static_cast<double>(alpha.size());
        case Flavor::bernoulli: return static_cast<double>(beta.size());
        case Flavor::combined: return gamma + static_cast<double>(alpha.size() + beta.size());
    }
    return 0.0;
}

std::vector<Stage> stages_of(const Protocol& p, StageOrder order) {
    std::vector<Stage> out;
    if (p.gamma > 0.0) out.push_back({Stage::Kind::poisson, p.gamma});
    for (double a : p.alpha) out.push_back({Stage::Kind::geometric, a});
    for (double b : p.beta) out.push_back({Stage::Kind::bernoulli, b});
    if (order == StageOrder::reversed) std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace qtasep
