#include <doctest.h>

#include "qtasep/macdonald.hpp"
#include "qtasep/moments.hpp"

#include <cmath>

using namespace qtasep;

TEST_CASE("default contours") {
    QParam q(0.5);
    auto c1 = default_contours(1, q, {1.0}, 0.1, 0.0, 64);
    REQUIRE(c1.k() == 1);
    CHECK(c1.circles[0].center == doctest::Approx(1.0));
    CHECK(c1.circles[0].radius == doctest::Approx(0.1));
    auto c3 = default_contours(3, q, {1, 1, 1}, 0.1, 0.02, 64);
    CHECK(c3.circles[0].radius < 1.0);
    CHECK_NOTHROW(validate_contours(c3, q, {1, 1, 1}));
    auto c2 = default_contours(2, q, {2, 1}, 0.1, 0.02, 64);
    CHECK(c2.circles[0].center == doctest::Approx(1.5));
    CHECK(c2.circles[1].radius >= 0.5 + 0.1 * 1.5 - 1e-12);
    CHECK_THROWS_AS(default_contours(2, q, {5, 0.1}, 0.1, 0.02, 64), ContourError);

    ContourFamily broken{{{1.0, 0.5, 64}, {1.0, 0.6, 64}}};
    CHECK_THROWS_AS(validate_contours(broken, q, {1, 1}), ContourError);
}

TEST_CASE("f ratio") {
    QParam q(0.5);
    CHECK(std::abs(f_ratio(Protocol::geometric({}), 1.0, q) - 1.0) < 1e-15);
    CHECK(std::abs(f_ratio(Protocol::poisson(0.0), Complex(0.3, 2), q) - 1.0) < 1e-15);
    CHECK(std::abs(f_ratio(Protocol::geometric({0.3, 0.3}), 1.0, q) - 0.49) < 1e-15);
    CHECK(std::abs(f_ratio(Protocol::bernoulli({1.0}), 1.0, q) - 0.75) < 1e-15);
    auto comb = f_ratio(Protocol::combined(0.4, {0.3}, {1.0}), 1.0, q);
    CHECK(std::abs(comb - std::exp(-0.2) * 0.7 * 0.75) < 1e-14);
    CHECK_THROWS(f_ratio(Protocol::bernoulli({1.0}), -1.0, q));
}

TEST_CASE("nested moment basics") {
    QParam q(0.5);
    std::vector<double> a{1, 1, 1};
    for (const auto& n : std::vector<std::vector<int>>{{1}, {2, 1}, {3, 3, 1}}) {
        auto m0 = nested_moment(Protocol::poisson(0.0), n, a, q);
        CHECK(std::abs(m0.value - 1.0) < 1e-10);
    }
    CHECK(std::abs(nested_moment(Protocol::poisson(0.8), {2, 0}, a, q).value) < 1e-10);
    auto m = nested_moment(Protocol::poisson(0.7), {1}, {1.0}, q);
    CHECK(std::abs(m.value - std::exp(-0.35)) < 1e-10);
    CHECK(std::abs(m.im_part) < 1e-10);
    CHECK(m.doubling_change < kDoublingTolerance);
}

TEST_CASE("k = 1 residues") {
    QParam q(0.5);
    CHECK(moment_k1_residues(Protocol::poisson(0.7), 1, {1.3}, q) == doctest::Approx(std::exp(-1.3 * 0.5 * 0.7)));
    CHECK(moment_k1_residues(Protocol::geometric(0.2, 4), 1, {1.3}, q) == doctest::Approx(std::pow(1 - 0.26, 4)));
    CHECK_THROWS(moment_k1_residues(Protocol::poisson(1), 2, {1.0, 1.0}, q));
    std::vector<double> a{1.3, 0.8, 1.1};
    for (const auto& spec : {Protocol::poisson(0.6), Protocol::geometric({0.3, 0.5}), Protocol::bernoulli({0.7, 1.2})})
        for (int n = 1; n <= 3; ++n)
            CHECK(std::abs(nested_moment(spec, {n}, a, q).value - moment_k1_residues(spec, n, a, q)) < 1e-10);
}

TEST_CASE("free equation and boundary residuals") {
    QParam q(0.5);
    std::vector<double> a{1, 1, 1};
    CHECK(free_equation_residual(Protocol::geometric(0.3, 2), {2}, a, q) < 1e-10);
    CHECK(free_equation_residual(Protocol::bernoulli(0.9, 2), {3, 1}, a, q) < 1e-10);
    CHECK(free_equation_residual(Protocol::poisson(0.5), {1}, a, q) < 1e-10);
    CHECK(free_equation_residual(Protocol::poisson(0.5), {1, 3}, a, q) < 1e-10);
    CHECK(boundary_residual(Protocol::poisson(0.5), {2, 2}, 1, a, q) < 1e-9);
    CHECK(boundary_residual(Protocol::geometric(0.3, 2), {3, 3, 1}, 1, a, q) < 1e-9);
    CHECK(boundary_residual(Protocol::poisson(0.0), {2, 2}, 1, a, q) < 1e-12);
    CHECK_THROWS(boundary_residual(Protocol::poisson(0.5), {2, 1}, 1, a, q));
}

TEST_CASE("contour independence and symmetrization") {
    QParam q(0.5);
    std::vector<double> a{1, 1, 1};
    auto spec = Protocol::poisson(0.5);
    double ref = nested_moment(spec, {3, 2, 1}, a, q).value;
    for (double scale : {0.75, 1.25}) {
        auto cf = default_contours(3, q, a, 0.1 * scale, 0.02 * scale, 0, &spec);
        CHECK(std::abs(nested_moment(spec, {3, 2, 1}, a, q, cf).value - ref) < 1e-9);
    }
    Complex (*G)(Complex) = [](Complex z) { return std::exp(z) / (3.0 - z); };
    CHECK(std::abs(symmetrization_integral({1.0, 0.4, 128}, q, G)) < 1e-10);
}

TEST_CASE("Macdonald operators") {
    QParam q(0.5);
    ScalarFn e = [](double x) { return std::exp(x); };
    std::vector<double> x{1.0, 0.7};
    CHECK(macdonald_apply_D(2, 0, e, x, q) == doctest::Approx(std::exp(1.7)));
    CHECK(macdonald_apply_D(1, 3, e, {0.9}, q) == doctest::Approx(std::exp(0.9 * 0.125)));
    ScalarFn one = [](double) { return 1.0; };
    CHECK(macdonald_apply_D(3, 1, one, {1.0, 0.6, 0.35}, q) == doctest::Approx(1.0));
    CHECK(verify_commutation(2, 1, x, e, q) < 1e-10);
    ScalarFn g = [](double z) { return 1.0 / (1.0 - z / 5.0); };
    CHECK(verify_commutation(3, 2, {1.0, 0.6, 0.3}, g, q) < 1e-9);
    CHECK(verify_moment_equality(1, 1, 0.5, {1.0}, q) < 1e-8);
    CHECK(verify_moment_equality(2, 2, 0.5, {1.0, 0.8}, q) < 1e-8);
    CHECK(macdonald_moment({0, 0, 0}, 0.5, {1.0, 0.8}, q) == doctest::Approx(1.0));
}
