#include <doctest.h>

#include "qtasep/dynamics.hpp"
#include "qtasep/monte_carlo.hpp"

#include <cmath>
#include <sstream>

using namespace qtasep;

TEST_CASE("step initial data") {
    CHECK(step_initial(1).x == std::vector<std::int64_t>{-1});
    CHECK(step_initial(3).x == std::vector<std::int64_t>{-1, -2, -3});
    auto s = step_initial(6);
    CHECK(!s.gap(1).has_value());
    for (int i = 2; i <= 6; ++i) CHECK(*s.gap(i) == 0);
    ParticleState bad{{0, 0}};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("observable q-products") {
    QParam q(0.5);
    ParticleState s{{0, -2}};
    CHECK(observable_q(s, {2, 1}, q) == doctest::Approx(0.5));
    CHECK(observable_q(s, {2, 0}, q) == 0.0);
    auto st = step_initial(3);
    CHECK(observable_q(st, {3, 2, 2}, q) == 1.0);
}

TEST_CASE("simulators keep the order") {
    auto p = unit_rates(5, 0.4);
    Rng rng(11);
    SUBCASE("poisson") {
        auto s = step_initial(5);
        evolve_poisson(s, 0.0, p, rng);
        CHECK(s == step_initial(5));
        for (int r = 0; r < 200; ++r) {
            evolve_poisson(s, 0.3, p, rng);
            CHECK_NOTHROW(s.validate());
        }
    }
    SUBCASE("geometric") {
        auto s = step_initial(5);
        for (int r = 0; r < 200; ++r) {
            step_geometric(s, 0.6, p, rng);
            CHECK_NOTHROW(s.validate());
        }
    }
    SUBCASE("bernoulli") {
        auto s = step_initial(5);
        for (int r = 0; r < 200; ++r) {
            auto before = s;
            step_bernoulli(s, 1.3, p, rng);
            CHECK_NOTHROW(s.validate());
            for (int i = 0; i < 5; ++i) {
                auto d = s.x[i] - before.x[i];
                CHECK((d == 0 || d == 1));
            }
        }
    }
}

TEST_CASE("blocked particle cannot move in a Bernoulli step") {
    // particle 1 is pinned by a tiny beta; particle 2 has zero gap
    auto p = unit_rates(2, 0.5);
    Rng rng(3);
    for (int r = 0; r < 1000; ++r) {
        ParticleState s{{0, -1}};
        step_bernoulli(s, 1e-300, p, rng);
        CHECK(s.x[1] == -1);
    }
}

TEST_CASE("single-particle closed forms by Monte Carlo") {
    const double q = 0.5;
    auto p = unit_rates(1, q);
    auto init = step_initial(1);
    McOptions opt{200000, 5, 0};
    auto pois = mc_expectation(Protocol::poisson(1.0), {1}, p, init, opt);
    CHECK(std::abs(pois.mean - std::exp(-0.5)) < 4 * pois.stderr_);
    auto geo = mc_expectation(Protocol::geometric(0.3, 3), {1}, p, init, opt);
    CHECK(std::abs(geo.mean - std::pow(0.7, 3)) < 4 * geo.stderr_);
    auto ber = mc_expectation(Protocol::bernoulli(1.0, 1), {1}, p, init, opt);
    CHECK(std::abs(ber.mean - 0.75) < 4 * ber.stderr_);
}

TEST_CASE("Monte Carlo at time zero and determinism") {
    auto p = unit_rates(3, 0.5);
    auto init = step_initial(3);
    McOptions opt{5000, 9, 1};
    auto e0 = mc_expectation(Protocol::poisson(0.0), {3, 2}, p, init, opt);
    CHECK(e0.mean == 1.0);
    CHECK(e0.stderr_ == 0.0);
    auto a = mc_expectation(Protocol::poisson(1.0), {2, 1}, p, init, opt);
    opt.workers = 3;
    auto b = mc_expectation(Protocol::poisson(1.0), {2, 1}, p, init, opt);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("zero-range dynamics") {
    auto p = unit_rates(3, 0.5);
    Rng rng(1);
    ZeroRangeState absorbed{{4, 0, 0, 0}};
    auto s = absorbed;
    evolve_zero_range_poisson(s, 5.0, p, rng);
    CHECK(s == absorbed);
    ZeroRangeState y{{0, 2, 1, 3}};
    for (int r = 0; r < 100; ++r) {
        evolve_zero_range_poisson(y, 0.2, p, rng);
        CHECK(y.total() == 6);
        step_zero_range_geometric(y, 0.4, p, rng);
        CHECK(y.total() == 6);
    }
}

namespace {
// law of the mover count from all 2^y stay/move patterns
std::vector<double> enumerate_movers(int y, double b, double q) {
    std::vector<double> law(y + 1, 0.0);
    for (int mask = 0; mask < (1 << y); ++mask) {
        double pr = 1.0;
        int stay = 0, moved = 0;
        for (int j = 0; j < y; ++j) {
            double pj = b * std::pow(q, stay);
            if (mask >> j & 1) {
                pr *= pj;
                ++moved;
            } else {
                pr *= 1 - pj;
                ++stay;
            }
        }
        law[moved] += pr;
    }
    return law;
}
}  // namespace

TEST_CASE("zero-range site movers") {
    const double b = 0.35, q = 0.5;
    for (int y = 0; y <= 4; ++y) {
        auto law = enumerate_movers(y, b, q);
        auto pmf = jump_pmf(y, b, QParam(q)).pmf;
        for (int s = 0; s <= y; ++s) CHECK(std::abs(law[s] - pmf[s]) < 1e-14);
    }
    CHECK(enumerate_movers(2, b, q)[2] == doctest::Approx(b * b));

    Rng rng(17);
    const int draws = 400000;
    for (int y = 1; y <= 4; ++y) {
        auto law = enumerate_movers(y, b, q);
        double mean = 0, second = 0;
        for (int s = 0; s <= y; ++s) {
            mean += s * law[s];
            second += s * s * law[s];
        }
        double sd = std::sqrt((second - mean * mean) / draws);
        double sum = 0;
        for (int r = 0; r < draws; ++r) sum += zero_range_site_movers(y, b, QParam(q), rng);
        CHECK(std::abs(sum / draws - mean) < 4 * sd);
    }
}

TEST_CASE("duality function") {
    QParam q(0.5);
    ParticleState x{{3, 1, -2}};
    CHECK(duality_H(x, ZeroRangeState{{1, 0, 2, 0}}, q) == 0.0);
    CHECK(duality_H(x, ZeroRangeState{{0, 1, 0, 2}}, q) == doctest::Approx(std::pow(0.5, 4 + 2)));

    auto p = unit_rates(3, 0.5);
    McOptions opt{2000, 4, 1};
    std::vector<Stage> none;
    auto r0 = duality_check(x, ZeroRangeState{{0, 1, 1, 0}}, none, p, opt);
    CHECK(r0.lhs.mean == r0.rhs.mean);
    CHECK(r0.lhs.mean == doctest::Approx(std::pow(0.5, 4 + 3)));
    std::vector<Stage> pois{{Stage::Kind::poisson, 0.7}};
    auto r1 = duality_check(x, ZeroRangeState{{1, 1, 0, 0}}, pois, p, opt);
    CHECK(r1.lhs.mean == 0.0);
    CHECK(r1.rhs.mean == 0.0);
}

TEST_CASE("trajectory dump") {
    std::ostringstream os;
    auto p = unit_rates(2, 0.5);
    dump_trajectories(os, step_initial(2), p, stages_of(Protocol::geometric(0.4, 2)), 3, 1);
    std::istringstream is(os.str());
    std::string line;
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) ++rows;
    CHECK(rows == 3 * 3 * 2);
}
