#include <doctest.h>

#include "qtasep/qcalc.hpp"

#include <cmath>
#include <random>

using namespace qtasep;

TEST_CASE("q-Pochhammer finite products") {
    QParam q(0.5);
    CHECK(q_pochhammer(0.3, q, 0) == 1.0);
    CHECK(q_pochhammer(1.0, q, 2) == 0.0);
    CHECK(q_pochhammer(0.3, q, 3) == doctest::Approx((1 - 0.3) * (1 - 0.15) * (1 - 0.075)).epsilon(1e-15));
    Complex a(0.2, 0.4);
    Complex direct = (1.0 - a) * (1.0 - a * 0.5) * (1.0 - a * 0.25);
    CHECK(std::abs(q_pochhammer(a, q, 3) - direct) < 1e-15);
}

TEST_CASE("q-Pochhammer infinite products") {
    QParam q(0.5);
    CHECK(q_pochhammer_inf(0.0, q) == 1.0);
    CHECK(q_pochhammer_inf(0.5, q) == doctest::Approx(0.5 * q_pochhammer_inf(0.25, q)).epsilon(1e-14));
    double coarse = q_pochhammer_inf(0.3, q, 1e-16);
    double fine = q_pochhammer_inf(0.3, q, 5e-17);
    CHECK(std::abs(coarse - fine) < 1e-14);
    CHECK_THROWS_AS(QParam(1.0), ParameterError);
    CHECK_THROWS_AS(QParam(0.0), ParameterError);
}

TEST_CASE("q-binomials and elementary symmetric values") {
    CHECK(q_binomial(5, 0, QParam(0.5)) == 1.0);
    CHECK(q_binomial(2, 1, QParam(0.5)) == doctest::Approx(1.5));
    CHECK(q_binomial(3, 4, QParam(0.5)) == 0.0);
    QParam q(0.3);
    for (int m = 1; m <= 8; ++m)
        for (int j = 1; j < m; ++j) {
            double pascal = q_binomial(m - 1, j - 1, q) + std::pow(0.3, j) * q_binomial(m - 1, j, q);
            CHECK(std::abs(q_binomial(m, j, q) - pascal) < 1e-13);
        }
    CHECK(elementary_sym_q(0, 4, QParam(0.5)) == 1.0);
    CHECK(elementary_sym_q(1, 3, QParam(0.5)) == doctest::Approx(1.75));
    CHECK(elementary_sym_q(2, 2, QParam(0.3)) == doctest::Approx(0.3));
}

TEST_CASE("C_a coefficients") {
    QParam q(0.4);
    for (double a : {0.3, -0.7, 1.9}) {
        CHECK(coeff_C(a, 1, 0, q) == doctest::Approx(1 + a));
        CHECK(coeff_C(a, 1, 1, q) == doctest::Approx(-a));
        CHECK(coeff_C(a, 3, 4, q) == 0.0);
        CHECK(coeff_C(a, 3, -1, q) == 0.0);
        auto row = coeff_C_row(a, 9, q);
        for (int s = 0; s <= 9; ++s)
            CHECK(std::abs(row[s] - coeff_C(a, 9, s, q)) < 1e-12 * std::max(1.0, std::abs(row[s])));
    }
}

TEST_CASE("jump distribution") {
    QParam q(0.5);
    auto d0 = jump_pmf(0, 0.3, q);
    REQUIRE(d0.pmf.size() == 1);
    CHECK(d0.pmf[0] == 1.0);
    auto d1 = jump_pmf(1, 0.4, q);
    REQUIRE(d1.pmf.size() == 2);
    CHECK(d1.pmf[0] == doctest::Approx(0.6));
    CHECK(d1.pmf[1] == doctest::Approx(0.4));
    auto d7 = jump_pmf(7, 0.3, q);
    CHECK(std::abs(d7.raw_sum - 1.0) < 1e-12);
    auto dinf = jump_pmf(std::nullopt, 0.3, q);
    CHECK(std::abs(dinf.raw_sum - 1.0) < 1e-12);
    CHECK(dinf.tail_bound < 1e-15);
    for (double u : {0.0, 0.3, 0.999999})
        CHECK(jump_sample_u(d0, u) == 0);
}

TEST_CASE("jump sampling frequencies") {
    QParam q(0.5);
    std::mt19937_64 rng(7);
    auto d1 = jump_pmf(1, 0.4, q);
    const int draws = 1000000;
    int ones = 0;
    for (int i = 0; i < draws; ++i) ones += jump_sample(d1, rng);
    CHECK(std::abs(ones / double(draws) - 0.4) < 0.002);

    // chi-square with 5 degrees of freedom; 20.52 is the 0.999 quantile
    auto d5 = jump_pmf(5, 0.3, q);
    std::vector<int> counts(6, 0);
    for (int i = 0; i < draws; ++i) ++counts[jump_sample(d5, rng)];
    double chi2 = 0;
    for (int j = 0; j <= 5; ++j) {
        double e = draws * d5.pmf[j];
        chi2 += (counts[j] - e) * (counts[j] - e) / e;
    }
    CHECK(chi2 < 20.52);
}

TEST_CASE("cached sampler agrees with inverse CDF") {
    QParam q(0.5);
    JumpSampler s(0.3, q, 8);
    for (int m : {0, 1, 3, 8, 20, 100})
        for (double u : {0.0, 0.1, 0.5, 0.77, 0.95, 0.9999}) {
            auto d = jump_pmf(m, 0.3, q);
            CHECK(s.sample(m, u) == jump_sample_u(d, u));
        }
    auto dinf = jump_pmf(std::nullopt, 0.3, q);
    for (double u : {0.0, 0.5, 0.9999})
        CHECK(s.sample(std::nullopt, u) == jump_sample_u(dinf, u));
}
