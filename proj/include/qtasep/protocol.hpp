#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qtasep {

enum class Flavor { poisson, geometric, bernoulli, combined };

std::string_view flavor_name(Flavor f) noexcept;
Flavor parse_flavor(std::string_view name);

/// What was run from time zero: Poisson dynamics for `gamma`, one geometric step per
/// entry of `alpha` and one Bernoulli step per entry of `beta`. A pure-flavor protocol
/// leaves the other fields empty. This is also the data that fixes the weight
/// f(qz)/f(z) in the contour formulas.
struct Protocol {
    Flavor flavor = Flavor::poisson;
    double gamma = 0.0;
    std::vector<double> alpha;
    std::vector<double> beta;

    static Protocol poisson(double t);
    static Protocol geometric(std::vector<double> alphas);
    static Protocol geometric(double alpha, int steps);
    static Protocol bernoulli(std::vector<double> betas);
    static Protocol bernoulli(double beta, int steps);
    static Protocol combined(double gamma, std::vector<double> alphas, std::vector<double> betas);

    /// Poisson time for the Poisson flavor, otherwise the number of discrete steps.
    double time() const noexcept;
};

/// One elementary piece of a protocol.
struct Stage {
    enum class Kind { poisson, geometric, bernoulli };
    Kind kind;
    double value;  // duration, alpha or beta
};

enum class StageOrder { canonical, reversed };

/// Expands a protocol into stages: Poisson first, then geometric, then Bernoulli
/// (canonical) or the exact reverse.
std::vector<Stage> stages_of(const Protocol& p, StageOrder order = StageOrder::canonical);

}  // namespace qtasep
