#pragma once

// Command-line front end: JSON experiment configs and the simulate / evolve / moments /
// fredholm / verify subcommands.

#include "qtasep/dynamics.hpp"
#include "qtasep/protocol.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtasep {

inline constexpr const char* kConfigSchema = "qtasep-v1";

/// Raised for malformed or inconsistent configuration; the message names the field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    Flavor flavor = Flavor::poisson;
    int N = 1;
    bool N_explicit = false;
    std::vector<std::vector<int>> n_vectors;  // observables prod q^{x_{n_i}+n_i}, sorted
    int k = 0;                                // set when n_vectors came from `k`
    std::vector<double> a;
    double q = 0.5;
    double t = 1.0;      // Poisson time, or number of discrete steps
    double gamma = 0.0;  // combined flavor: Poisson time
    std::vector<double> alpha_schedule;
    std::vector<double> beta_schedule;
    std::optional<std::vector<std::int64_t>> initial;  // default: step initial data
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    int workers = 0;
    std::vector<std::complex<double>> zeta;   // fredholm
    int invert_max = -1;                      // fredholm: recover P(x_n+n = m) for m <= invert_max
    std::optional<std::vector<double>> contour_radii;  // moments / verify contour
    std::string suite;                        // verify
    std::optional<std::string> trajectories;  // simulate: path for per-trajectory dump
    std::uint64_t trajectory_count = 100;
    std::optional<std::string> out;
    std::string hash;                         // FNV-1a of the canonical config, seed excluded

    Protocol protocol() const;
    ProcessParams params() const;
    ParticleState initial_state() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

/// Parses and validates a qtasep-v1 document. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& json_text);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

std::string cmd_simulate(const ExperimentConfig& c, bool json);
std::string cmd_evolve(const ExperimentConfig& c, bool json);
std::string cmd_moments(const ExperimentConfig& c, bool json);
std::string cmd_fredholm(const ExperimentConfig& c, bool json);
/// Returns the report; `pass` receives the overall verdict.
std::string cmd_verify(const ExperimentConfig& c, bool json, bool& pass);

/// Exit status: 0 success, 1 usage or configuration error, 2 verification failure.
int run_cli(int argc, char** argv);

}  // namespace qtasep
