#include <doctest.h>

#include "qtasep/fredholm.hpp"

#include <cmath>

using namespace qtasep;

namespace {
const Complex I(0.0, 1.0);
}

TEST_CASE("circle grid") {
    auto g = circle_grid(Complex(0.5, 0), 0.75, 128);
    Complex wsum = 0, dz_over_z = 0;
    for (int j = 0; j < g.size(); ++j) {
        wsum += g.weights[j];
        dz_over_z += g.weights[j] / g.nodes[j];
    }
    CHECK(std::abs(wsum) < 1e-14);
    CHECK(std::abs(dz_over_z - 2.0 * M_PI * I) < 1e-13);
}

TEST_CASE("Fredholm determinant of simple kernels") {
    auto g = circle_grid(Complex(0, 0), 1.0, 64);
    Kernel zero = [](Complex, Complex) { return Complex(0); };
    CHECK(std::abs(fredholm_det(zero, g) - 1.0) < 1e-15);
    // rank one: det = 1 + (1/2 pi i) \oint v(w) u(w) dw, here u v = e^w / w^2 with residue 1
    Kernel rank1 = [](Complex w, Complex wp) { return std::exp(w) / w * (1.0 / wp); };
    CHECK(std::abs(fredholm_det(rank1, g) - 2.0) < 1e-13);
}

TEST_CASE("kernels at trivial parameters") {
    QParam q(0.5);
    TransformPoint p{Complex(-1e-9, 0), Protocol::bernoulli(1.0, 1), 1, q};
    CHECK(std::abs(mb_kernel(0.3, 0.4, p)) < 1e-3);
    TransformPoint p0{Complex(-1, 0), Protocol::bernoulli({}), 0, q};
    Complex w(0.2, 0.3), wp(-0.1, 0.5);
    CHECK(std::abs(cauchy_kernel(w, wp, p0) - 1.0 / (0.5 * wp - w)) < 1e-14);
    TransformPoint p1{Complex(-1, 0), Protocol::bernoulli({1.0}), 0, q};
    CHECK(std::abs(cauchy_kernel(w, wp, p1) - (1.0 + 0.5 * w) / (1.0 + w) / (0.5 * wp - w)) < 1e-14);
    SQuadrature s12{12.0}, s24{24.0};
    TransformPoint pb{Complex(-2, 0), Protocol::bernoulli(1.0, 2), 2, q};
    CHECK(std::abs(mb_kernel(w, wp, pb, s12) - mb_kernel(w, wp, pb, s24)) < 1e-12);
}

TEST_CASE("q-Laplace transform: MB, Cauchy and direct") {
    QParam q(0.5);
    TransformPoint p{Complex(-0.3, 0), Protocol::bernoulli(1.0, 1), 1, q};
    auto mb = q_laplace_mb(p);
    auto ca = q_laplace_cauchy(p);
    CHECK(std::abs(mb.value - ca.value) < 1e-8);
    auto pmf = bernoulli_exact_pmf(1, {1.0}, q);
    REQUIRE(pmf.size() >= 2);
    CHECK(pmf[0] == doctest::Approx(0.5));
    CHECK(pmf[1] == doctest::Approx(0.5));
    CHECK(std::abs(q_laplace_direct(pmf, p.zeta, q) - mb.value) < 1e-7);
    CauchyTransform ct(Protocol::bernoulli(1.0, 1), 1, q);
    CHECK(std::abs(ct.transform(0.0) - 1.0) < 1e-12);
    CHECK(std::abs(ct.transform(p.zeta) - ca.value) < 1e-9);
}

TEST_CASE("direct transform") {
    QParam q(0.5);
    CHECK(std::abs(q_laplace_direct({0, 0, 1}, 0.0, q) - 1.0) < 1e-15);
    Complex z(-0.7, 0.2);
    Complex two = q_laplace_direct({0.5, 0.5}, z, q);
    Complex hand = 0.5 / q_pochhammer_inf(z, q) + 0.5 / q_pochhammer_inf(z * 0.5, q);
    CHECK(std::abs(two - hand) < 1e-14);
    Complex mix = 0.4 * q_laplace_direct({0.2, 0.8}, z, q) + 0.6 * q_laplace_direct({0.5, 0.1, 0.4}, z, q);
    CHECK(std::abs(mix - q_laplace_direct({0.38, 0.38, 0.24}, z, q)) < 1e-14);
}

TEST_CASE("pmf from moments") {
    QParam q(0.5);
    auto d = pmf_from_moments({1, 1, 1, 1}, q);
    CHECK(d[0] == doctest::Approx(1.0));
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(std::abs(d[i]) < 1e-12);
}

TEST_CASE("inversion contour integral") {
    QParam q(0.5);
    auto delta = [&](Complex z) { return q_laplace_direct({1.0}, z, q); };
    CHECK(std::abs(invert_q_laplace(delta, 0, q).probability - 1.0) < 1e-8);

    CauchyTransform one(Protocol::bernoulli(1.0, 1), 1, q);
    CHECK(std::abs(invert_q_laplace(one, 1).probability - 0.5) < 1e-7);

    CauchyTransform four(Protocol::bernoulli(1.0, 4), 2, q);
    double mass = 0;
    for (int m = 0; m <= 4; ++m) mass += invert_q_laplace(four, m).probability;
    CHECK(std::abs(mass - 1.0) < 1e-6);
}
